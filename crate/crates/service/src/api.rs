//! Response bodies. Every body carries `schema_version`.

use std::collections::BTreeMap;

use inkscreen_core::stroke::{Diagnosis, Task, ValidationReport};
use inkscreen_core::synth::{TmtLayout, TmtTarget};
use serde::{Deserialize, Serialize};

pub const API_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorDetail {
    /// Machine-readable error name, e.g. `RangeViolation`.
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub schema_version: u32,
    pub error: ErrorDetail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionCreated {
    pub schema_version: u32,
    pub id: String,
    pub validation: ValidationReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureResponse {
    pub schema_version: u32,
    pub id: String,
    pub columns: Vec<String>,
    /// `null` where the mask is set.
    pub values: Vec<Option<f64>>,
    pub missing_mask: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskHighlights {
    pub speed_median: Option<f64>,
    pub pause_mean: Option<f64>,
    pub pressure_median: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeningReport {
    pub schema_version: u32,
    pub id: String,
    pub probabilities: BTreeMap<Diagnosis, f64>,
    pub predicted_diagnosis: Diagnosis,
    /// Clamped to `[0, 30]`.
    pub mmse: f64,
    pub mtl_atrophy_z: f64,
    pub highlights: BTreeMap<Task, TaskHighlights>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskDefinition {
    pub task: Task,
    pub name: String,
    pub instruction: String,
    /// Target circles for the trail-making tasks, in visiting order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets: Option<Vec<TmtTarget>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TasksResponse {
    pub schema_version: u32,
    pub canvas_mm: [f64; 2],
    pub target_radius_mm: f64,
    pub tasks: Vec<TaskDefinition>,
}

pub fn task_definitions(layout: &TmtLayout) -> TasksResponse {
    let def = |task, name: &str, instruction: &str, targets: Option<&Vec<TmtTarget>>| TaskDefinition {
        task,
        name: name.to_string(),
        instruction: instruction.to_string(),
        targets: targets.cloned(),
    };
    TasksResponse {
        schema_version: API_SCHEMA_VERSION,
        canvas_mm: layout.canvas_mm,
        target_radius_mm: layout.target_radius_mm,
        tasks: vec![
            def(Task::Sentence, "Sentence writing", "Write a complete sentence of your own choosing.", None),
            def(Task::Pentagon, "Pentagon copying", "Copy the figure of two overlapping pentagons.", None),
            def(
                Task::TmtA,
                "Trail Making Test A",
                "Connect the circles in order, 1 to 2 to 3 and so on, without lifting the pen.",
                Some(&layout.tmt_a),
            ),
            def(
                Task::TmtB,
                "Trail Making Test B",
                "Connect the circles alternating numbers and letters, 1 to A to 2 to B and so on.",
                Some(&layout.tmt_b),
            ),
            def(
                Task::Cdt,
                "Clock drawing",
                "Draw an analog clock face with all the numbers, and set the hands to 10 o'clock.",
                None,
            ),
        ],
    }
}
