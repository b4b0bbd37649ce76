use serde::{Deserialize, Serialize};

/// One solver run, serialized as a single JSON object per line. Everything
/// except `wall_ms` is deterministic for fixed seed and flags.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RunReport {
    pub algorithm: String,
    pub metric: String,
    pub weighted: bool,
    pub n: usize,
    pub lambda: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_star: Option<f64>,
    pub decision_call_count: u64,
    pub bfs_steps: u64,
    pub stages: u64,
    pub fallback: bool,
    pub wall_ms: f64,
    pub seed: u64,
    pub oracle_checked: bool,
}

impl RunReport {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    pub fn csv_header() -> &'static str {
        "algorithm,metric,weighted,n,lambda,r_star,decision_call_count,bfs_steps,stages,fallback,wall_ms,seed,oracle_checked"
    }

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.algorithm,
            self.metric,
            self.weighted,
            self.n,
            self.lambda,
            self.r_star.map(|r| r.to_string()).unwrap_or_default(),
            self.decision_call_count,
            self.bfs_steps,
            self.stages,
            self.fallback,
            self.wall_ms,
            self.seed,
            self.oracle_checked
        )
    }
}
