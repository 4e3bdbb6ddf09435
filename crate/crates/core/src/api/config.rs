use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::aca::parse_rule_file;
use crate::defaults;
use crate::monitor::{Engine, EngineError};
use crate::rdf::{parse_turtle, PrefixMap};
use crate::schema::load_declared_schema;
use crate::sim::WorldConfig;

/// Server settings. Relative paths resolve against the config file's
/// directory; missing ones fall back to the shipped defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct ApiConfig {
    pub port: u16,
    pub ontology: Option<PathBuf>,
    pub rules: Option<PathBuf>,
    /// Declared schema triples (pattern syntax, variables as wildcards).
    pub schema: Option<PathBuf>,
    pub world: Option<PathBuf>,
    pub seed: u64,
    pub tick_period_ms: u64,
    /// Start ticking immediately instead of waiting for `/sim/run`.
    pub autorun: bool,
    /// Directory of UI assets served at `/`.
    pub static_dir: Option<PathBuf>,
}

impl Default for ApiConfig {
    fn default() -> Self {
        ApiConfig {
            port: 8080,
            ontology: None,
            rules: None,
            schema: None,
            world: None,
            seed: 0,
            tick_period_ms: 500,
            autorun: false,
            static_dir: None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("tick period must be at least 1 ms")]
    TickPeriod,
    #[error(transparent)]
    Engine(#[from] EngineError),
}

fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })
}

impl ApiConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let mut config: ApiConfig = serde_json::from_str(&read(path)?).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let dir = path.parent().unwrap_or(Path::new("."));
        for slot in [
            &mut config.ontology,
            &mut config.rules,
            &mut config.schema,
            &mut config.world,
            &mut config.static_dir,
        ] {
            if let Some(p) = slot.as_mut() {
                if p.is_relative() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.tick_period_ms == 0 {
            return Err(ConfigError::TickPeriod);
        }
        Ok(())
    }

    pub fn build_engine(&self) -> Result<Engine, ConfigError> {
        self.validate()?;
        let parse_err = |path: &Path, e: &dyn std::fmt::Display| ConfigError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        };
        let world = match &self.world {
            Some(p) => serde_json::from_str::<WorldConfig>(&read(p)?).map_err(|e| parse_err(p, &e))?,
            None => WorldConfig::default_mine(),
        };
        let prefixes = PrefixMap::with_defaults(&world.base);
        let rules = match &self.rules {
            Some(p) => parse_rule_file(&read(p)?, &prefixes).map_err(|e| parse_err(p, &e))?,
            None => defaults::rules(&prefixes).map_err(EngineError::from)?,
        };
        let names = match &self.ontology {
            Some(p) => parse_turtle(&read(p)?, &prefixes).map_err(|e| parse_err(p, &e))?,
            None => defaults::ontology(&prefixes).map_err(EngineError::from)?,
        };
        let mut engine = Engine::new(world, self.seed, rules, names)?;
        if let Some(p) = &self.schema {
            let declared = load_declared_schema(&read(p)?, &prefixes).map_err(|e| parse_err(p, &e))?;
            engine.set_declared_schema(declared)?;
        }
        Ok(engine)
    }
}
