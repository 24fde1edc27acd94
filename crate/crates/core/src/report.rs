//! Run reports: solution payloads, separated-set outcomes, and the JSON
//! report emitted by every pipeline.

use serde::Serialize;

use crate::conditioning::TraceStep;

pub const SCHEMA_VERSION: u32 = 1;

/// Parameters echoed into every report for replay.
#[derive(Debug, Clone, Serialize)]
pub struct ReportParams {
    pub r: f64,
    pub d: usize,
    pub tol_feas: f64,
    pub tol_psd: f64,
    pub tol_obj: f64,
    pub theta_mode: String,
}

/// One separated-set invocation inside a pipeline.
#[derive(Debug, Clone, Serialize)]
pub struct ArvOutcome {
    pub stage: String,
    pub delta: f64,
    pub sizes: (usize, usize),
    pub retries: usize,
    pub fallback: bool,
}

/// The solution payload, by problem shape.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SolutionData {
    /// Vertex cover: the chosen vertices.
    Cover { vertices: Vec<usize> },
    /// Bipartition: vertices on the first side.
    Partition { side: Vec<usize> },
    /// Sparsest cut: the chosen subset.
    Subset { vertices: Vec<usize> },
    /// Symmetric directed cut: signed vertices on the cut side.
    SignedCut { side: Vec<i32> },
    /// Boolean assignment, `values[i]` for variable `i + 1`.
    Assignment { values: Vec<bool> },
}

/// Full report of one pipeline run.
#[derive(Debug, Clone, Serialize)]
pub struct PipelineReport {
    pub schema: u32,
    pub problem: String,
    pub n: usize,
    pub params: ReportParams,
    /// Relaxation bound in problem units (binary-search result, normalized).
    pub obj_star: f64,
    /// Achieved objective, recomputed exactly by the validator.
    pub objective: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_opt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    pub solution: SolutionData,
    pub trace: Vec<TraceStep>,
    pub arv: Vec<ArvOutcome>,
    pub flags: Vec<String>,
    pub seed: u64,
    /// Wall-clock milliseconds; omitted by default so reports are
    /// byte-identical across runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ms: Option<u64>,
}

impl PipelineReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    /// True when any fallback path was taken.
    pub fn flagged(&self) -> bool {
        !self.flags.is_empty() || self.arv.iter().any(|a| a.fallback)
    }
}
