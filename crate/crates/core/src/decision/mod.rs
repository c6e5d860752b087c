//! The decision layer: one agent loop whose stages (interaction,
//! self-reflection, planning, tool use) can be backed by deterministic rules,
//! a hallucination injector wrapped around another backend, or an external
//! chat-completion model.

mod agent;
mod hallucinate;
mod llm;
mod map;
mod planner;
mod reflection;
mod task;

pub use agent::{Agent, AgentPorts, PlannerBackend, TaskOrder};
pub use hallucinate::{hallucinate_wrap, Hallucination};
pub use llm::{parse_llm_commands, CompletionClient, LlmError, LlmPlanner, PLANNER_PROMPT, TOOL_PROMPT};
pub use map::FreeSpaceMap;
pub use planner::plan_rule;
pub use reflection::{self_reflection, ReflectionNote};
pub use task::{Goal, Task, TaskState};
