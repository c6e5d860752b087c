use std::fmt;
use thiserror::Error;

use super::reflection::ReflectionNote;
use super::task::Task;
use crate::instinct::{HighCommandKind, ScanSummary};
use crate::params::Params;

/// System prompt for the planning stage: turn a task and the robot's view of
/// the world into a short plan in prose.
pub const PLANNER_PROMPT: &str = "\
You plan motion for a small differential-drive robot in a 2D arena. \
You are given the current task, the robot pose, the minimum lidar range in \
eight 45-degree sectors (sector 0 straight ahead, counter-clockwise), and a \
list of world-frame sectors that recently had commands refused for being \
unsafe. Reply with a short numbered list of intermediate points (x, y in \
metres, world frame) ending at the goal. Avoid blocked sectors. Do not \
include anything else.";

/// System prompt for the tool-use stage: turn the plan into commands.
pub const TOOL_PROMPT: &str = "\
Convert the plan into robot commands. Reply with ONLY a JSON array. Each \
element is one of:
  {\"kind\":\"MOVE_TO\",\"x\":<m>,\"y\":<m>}            optional \"speed\":<m/s>
  {\"kind\":\"ROTATE_TO\",\"theta\":<rad>}
  {\"kind\":\"FOLLOW_PATH\",\"waypoints\":[{\"x\":<m>,\"y\":<m>}, ...]}
  {\"kind\":\"STOP\"}
  {\"kind\":\"QUERY_STATUS\"}
No other kinds or fields are accepted. Speeds above the wheel limit are \
rejected, not clamped.";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LlmError {
    #[error("transport: {0}")]
    Transport(String),
    #[error("MALFORMED: {0}")]
    Malformed(String),
}

/// A chat-completion style endpoint: one system prompt, one user message,
/// one text reply.
pub trait CompletionClient: Send {
    fn complete(&mut self, system: &str, user: &str) -> Result<String, LlmError>;
}

/// Extracts and strictly validates a command array from model output. The
/// array is taken from the first `[` to the last `]`; any element that does
/// not parse or fails validation rejects the whole batch.
pub fn parse_llm_commands(text: &str, params: &Params) -> Result<Vec<HighCommandKind>, LlmError> {
    let (Some(start), Some(end)) = (text.find('['), text.rfind(']')) else {
        return Err(LlmError::Malformed("no JSON array in response".into()));
    };
    if end < start {
        return Err(LlmError::Malformed("no JSON array in response".into()));
    }
    let cmds: Vec<HighCommandKind> =
        serde_json::from_str(&text[start..=end]).map_err(|e| LlmError::Malformed(e.to_string()))?;
    for (i, c) in cmds.iter().enumerate() {
        c.validate(params).map_err(|e| LlmError::Malformed(format!("element {i}: {e}")))?;
    }
    Ok(cmds)
}

/// Two-stage planner over an external model: a planning prompt followed by a
/// tool-use prompt whose reply must be a command array.
pub struct LlmPlanner {
    client: Box<dyn CompletionClient>,
}

impl fmt::Debug for LlmPlanner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LlmPlanner").finish_non_exhaustive()
    }
}

impl LlmPlanner {
    pub fn new(client: Box<dyn CompletionClient>) -> Self {
        Self { client }
    }

    pub fn plan(
        &mut self,
        task: &Task,
        notes: &ReflectionNote,
        summary: &ScanSummary,
        params: &Params,
    ) -> Result<Vec<HighCommandKind>, LlmError> {
        let context = serde_json::json!({
            "task": task,
            "pose": summary.pose_estimate,
            "sector_min": summary.sector_min,
            "blocked_sectors": notes.blocked_sectors(),
            "last_refusal": notes.last_refusal_reason,
            "v_wheel_max": params.v_wheel_max,
        });
        let plan = self.client.complete(PLANNER_PROMPT, &context.to_string())?;
        let reply = self.client.complete(TOOL_PROMPT, &plan)?;
        parse_llm_commands(&reply, params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decision::Goal;
    use crate::instinct::Nearest;
    use crate::sim::{Mode, Pose2D};

    #[test]
    fn happy_path() {
        let text = r#"Sure: [{"kind":"MOVE_TO","x":1.0,"y":2.0}] done"#;
        let cmds = parse_llm_commands(text, &Params::default()).unwrap();
        assert_eq!(cmds, vec![HighCommandKind::move_to(1.0, 2.0)]);
    }

    #[test]
    fn unknown_kind_is_malformed() {
        let err = parse_llm_commands(r#"[{"kind":"FLY_TO","x":1.0,"y":2.0}]"#, &Params::default()).unwrap_err();
        assert!(matches!(err, LlmError::Malformed(_)));
    }

    #[test]
    fn out_of_range_speed_is_malformed_not_clamped() {
        let text = r#"[{"kind":"MOVE_TO","x":1.0,"y":2.0},{"kind":"MOVE_TO","x":1.0,"y":2.0,"speed":9.9}]"#;
        assert!(matches!(parse_llm_commands(text, &Params::default()), Err(LlmError::Malformed(_))));
    }

    #[test]
    fn prose_without_array_is_malformed() {
        assert!(parse_llm_commands("go forward a bit", &Params::default()).is_err());
        assert!(parse_llm_commands("] then [", &Params::default()).is_err());
        assert!(parse_llm_commands(r#"[{"kind":"MOVE_TO","x":1.0}]"#, &Params::default()).is_err());
    }

    struct Scripted(Vec<String>, Vec<String>);

    impl CompletionClient for Scripted {
        fn complete(&mut self, system: &str, _user: &str) -> Result<String, LlmError> {
            self.1.push(system.to_string());
            Ok(self.0.remove(0))
        }
    }

    #[test]
    fn planner_runs_both_stages() {
        let client = Scripted(vec!["1. (2, 0)".into(), r#"[{"kind":"MOVE_TO","x":2.0,"y":0.0}]"#.into()], vec![]);
        let mut planner = LlmPlanner::new(Box::new(client));
        let summary = ScanSummary {
            sector_min: [5.0; 8],
            nearest: Nearest { bearing: 0.0, range: 5.0 },
            pose_estimate: Pose2D::default(),
            load: 0.0,
            mode: Mode::Normal,
            tick: 0,
        };
        let task = Task::new(1, Goal::Goto { x: 2.0, y: 0.0 });
        let cmds = planner.plan(&task, &ReflectionNote::default(), &summary, &Params::default()).unwrap();
        assert_eq!(cmds, vec![HighCommandKind::move_to(2.0, 0.0)]);
    }
}
