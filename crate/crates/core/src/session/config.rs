use crate::error::{Error, Result};
use crate::kinematics::SolverConfig;
use crate::recognition::RecognitionConfig;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Service settings, read from a JSON file in the protocol's vocabulary.
/// Every field is optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    /// `host:port` to listen on.
    pub listen: String,
    /// Upper bound on simulation events per second per connection.
    pub throttle_hz: f64,
    pub heartbeat_secs: u64,
    pub timeout_secs: u64,
    pub recognition: RecognitionConfig,
    pub solver: SolverConfig,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            listen: "127.0.0.1:8765".into(),
            throttle_hz: 60.0,
            heartbeat_secs: 10,
            timeout_secs: 30,
            recognition: RecognitionConfig::default(),
            solver: SolverConfig::default(),
        }
    }
}

impl ServiceConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ServiceConfig = serde_json::from_str(text).map_err(|e| Error::FormatError {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if !(cfg.throttle_hz > 0.0 && cfg.throttle_hz.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "throttle_hz must be > 0, got {}",
                cfg.throttle_hz
            )));
        }
        if cfg.timeout_secs <= cfg.heartbeat_secs {
            return Err(Error::InvalidParameter(
                "timeout_secs must exceed heartbeat_secs".into(),
            ));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_partial_files() {
        let cfg = ServiceConfig::from_json("{}").unwrap();
        assert_eq!(cfg, ServiceConfig::default());
        let cfg =
            ServiceConfig::from_json(r#"{"listen":"0.0.0.0:9000","solver":{"max_iterations":20}}"#)
                .unwrap();
        assert_eq!(cfg.listen, "0.0.0.0:9000");
        assert_eq!(cfg.solver.max_iterations, 20);
        assert_eq!(cfg.solver.max_halvings, 8);
    }

    #[test]
    fn bad_files() {
        assert_eq!(
            ServiceConfig::from_json(r#"{"port":1}"#)
                .unwrap_err()
                .code(),
            "FormatError"
        );
        assert_eq!(
            ServiceConfig::from_json(r#"{"throttle_hz":0}"#)
                .unwrap_err()
                .code(),
            "InvalidParameter"
        );
    }
}
