use serde::{Deserialize, Serialize};

use crate::sim::Point;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "SCREAMING_SNAKE_CASE", deny_unknown_fields)]
pub enum Goal {
    Goto { x: f64, y: f64 },
    Patrol { waypoints: Vec<Point> },
    Hold,
}

impl Goal {
    pub fn validate(&self) -> Result<(), String> {
        match self {
            Goal::Goto { x, y } if !(x.is_finite() && y.is_finite()) => Err("GOTO target not finite".into()),
            Goal::Patrol { waypoints } if waypoints.is_empty() => Err("PATROL needs waypoints".into()),
            Goal::Patrol { waypoints } if waypoints.iter().any(|p| !p.is_finite()) => {
                Err("PATROL waypoint not finite".into())
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TaskState {
    Pending,
    Active,
    Completed,
    Blocked,
}

impl TaskState {
    pub fn is_terminal(self) -> bool {
        matches!(self, TaskState::Completed | TaskState::Blocked)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub id: u64,
    pub goal: Goal,
    pub state: TaskState,
    pub attempts: u32,
    /// Next PATROL waypoint.
    pub progress: usize,
}

impl Task {
    pub fn new(id: u64, goal: Goal) -> Self {
        Self { id, goal, state: TaskState::Pending, attempts: 0, progress: 0 }
    }

    /// Moves along PENDING -> ACTIVE -> {COMPLETED, BLOCKED}. Returns false
    /// (and changes nothing) for any other transition.
    pub fn transition(&mut self, to: TaskState) -> bool {
        let ok = matches!(
            (self.state, to),
            (TaskState::Pending, TaskState::Active)
                | (TaskState::Active, TaskState::Completed)
                | (TaskState::Active, TaskState::Blocked)
        );
        if ok {
            self.state = to;
        }
        ok
    }

    /// The point the task is currently trying to reach.
    pub fn current_target(&self) -> Option<Point> {
        match &self.goal {
            Goal::Goto { x, y } => Some(Point::new(*x, *y)),
            Goal::Patrol { waypoints } => waypoints.get(self.progress).copied(),
            Goal::Hold => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn only_forward_transitions() {
        let mut t = Task::new(1, Goal::Hold);
        assert!(!t.transition(TaskState::Completed));
        assert!(t.transition(TaskState::Active));
        assert!(!t.transition(TaskState::Pending));
        assert!(t.transition(TaskState::Blocked));
        assert!(!t.transition(TaskState::Completed));
        assert_eq!(t.state, TaskState::Blocked);
    }

    #[test]
    fn goal_wire_shape() {
        let g: Goal = serde_json::from_str(r#"{"type":"GOTO","x":3.0,"y":2.0}"#).unwrap();
        assert_eq!(g, Goal::Goto { x: 3.0, y: 2.0 });
        assert!(serde_json::from_str::<Goal>(r#"{"type":"GOTO","x":3.0,"y":2.0,"z":1}"#).is_err());
    }
}
