//! Run configuration: JSON file values overlaid by command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use ibirm_core::trainer::Optimizer;
use ibirm_core::{Example, GeneratorSpec, Method};

/// Every field optional so a config file may set any subset.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub example: Option<String>,
    pub envs: Option<usize>,
    pub seed: Option<u64>,
    pub queries: Option<usize>,
    pub seeds: Option<usize>,
    pub methods: Option<String>,
    pub out: Option<PathBuf>,
    pub p: Option<f64>,
    pub gamma: Option<f64>,
    pub eps: Option<f64>,
    pub dt: Option<f64>,
    pub n_per_env: Option<usize>,
    pub steps: Option<usize>,
    pub optimizer: Option<String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
    }

    /// Fields set in `over` win.
    pub fn overlay(self, over: FileConfig) -> FileConfig {
        FileConfig {
            example: over.example.or(self.example),
            envs: over.envs.or(self.envs),
            seed: over.seed.or(self.seed),
            queries: over.queries.or(self.queries),
            seeds: over.seeds.or(self.seeds),
            methods: over.methods.or(self.methods),
            out: over.out.or(self.out),
            p: over.p.or(self.p),
            gamma: over.gamma.or(self.gamma),
            eps: over.eps.or(self.eps),
            dt: over.dt.or(self.dt),
            n_per_env: over.n_per_env.or(self.n_per_env),
            steps: over.steps.or(self.steps),
            optimizer: over.optimizer.or(self.optimizer),
        }
    }
}

/// Fully resolved configuration; its JSON form is hashed into file headers.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub example: String,
    pub envs: usize,
    pub seed: u64,
    pub queries: usize,
    pub seeds: usize,
    pub methods: Vec<String>,
    /// Where results go does not change what they are.
    #[serde(skip)]
    pub out: PathBuf,
    pub p: f64,
    pub gamma: f64,
    pub eps: f64,
    pub dt: f64,
    pub n_per_env: usize,
    pub steps: usize,
    pub optimizer: String,
}

impl RunConfig {
    pub fn resolve(command: &str, c: FileConfig) -> Result<Self, String> {
        let cfg = RunConfig {
            command: command.to_string(),
            example: c.example.unwrap_or_else(|| "ex2".into()),
            envs: c.envs.unwrap_or(3),
            seed: c.seed.unwrap_or(0),
            queries: c.queries.unwrap_or(20),
            seeds: c.seeds.unwrap_or(50),
            methods: c
                .methods
                .unwrap_or_else(|| "erm,irm,iberm,ibirm".into())
                .split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect(),
            out: c.out.unwrap_or_else(|| PathBuf::from("out")),
            p: c.p.unwrap_or(0.9),
            gamma: c.gamma.unwrap_or(0.58),
            eps: c.eps.unwrap_or(1e-3),
            dt: c.dt.unwrap_or(ibirm_core::numeric::DEFAULT_DT),
            n_per_env: c.n_per_env.unwrap_or(1000),
            steps: c.steps.unwrap_or(ibirm_core::trainer::DEFAULT_STEPS),
            optimizer: c.optimizer.unwrap_or_else(|| "gd".into()),
        };
        // Surface parse problems before any work starts.
        cfg.spec()?;
        cfg.method_list()?;
        cfg.optimizer_kind()?;
        Ok(cfg)
    }

    pub fn spec(&self) -> Result<GeneratorSpec, String> {
        let (example, scramble) = parse_example(&self.example)?;
        let spec = GeneratorSpec::new(example, self.envs)
            .scrambled(scramble)
            .with_n(self.n_per_env);
        spec.validate().map_err(|e| e.to_string())?;
        Ok(spec)
    }

    pub fn method_list(&self) -> Result<Vec<Method>, String> {
        if self.methods.is_empty() {
            return Err("--methods must name at least one method".into());
        }
        self.methods
            .iter()
            .map(|m| Method::parse(m).ok_or_else(|| format!("unknown method `{m}`")))
            .collect()
    }

    pub fn optimizer_kind(&self) -> Result<Optimizer, String> {
        match self.optimizer.to_ascii_lowercase().as_str() {
            "gd" => Ok(Optimizer::Gd),
            "adam" => Ok(Optimizer::Adam),
            other => Err(format!("unknown optimizer `{other}` (expected gd or adam)")),
        }
    }

    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        ibirm_core::report::config_hash(&canonical)
    }
}

pub fn parse_example(s: &str) -> Result<(Example, bool), String> {
    Ok(match s {
        "ex1" => (Example::Ex1, false),
        "ex1s" => (Example::Ex1, true),
        "ex2" => (Example::Ex2, false),
        "ex2s" => (Example::Ex2, true),
        "ex3" => (Example::Ex3, false),
        "ex3s" => (Example::Ex3, true),
        "twod" => (Example::TwoD, false),
        "xor" => (Example::Xor, false),
        other => return Err(format!("unknown example `{other}`")),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file = FileConfig {
            example: Some("ex1".into()),
            seeds: Some(5),
            ..Default::default()
        };
        let flags = FileConfig {
            seeds: Some(7),
            ..Default::default()
        };
        let cfg = RunConfig::resolve("sweep", file.overlay(flags)).unwrap();
        assert_eq!((cfg.example.as_str(), cfg.seeds), ("ex1", 7));
    }

    #[test]
    fn example_labels() {
        assert_eq!(parse_example("ex3s").unwrap(), (Example::Ex3, true));
        assert!(parse_example("ex4").is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::resolve("sweep", FileConfig::default()).unwrap();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.out = PathBuf::from("elsewhere");
        assert_eq!(a.hash(), b.hash());
        b.seed = 1;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn bad_values_rejected() {
        let bad = |f: FileConfig| RunConfig::resolve("sweep", f).is_err();
        assert!(bad(FileConfig {
            methods: Some("erm,sgd".into()),
            ..Default::default()
        }));
        assert!(bad(FileConfig {
            envs: Some(0),
            ..Default::default()
        }));
        assert!(bad(FileConfig {
            optimizer: Some("lbfgs".into()),
            ..Default::default()
        }));
    }
}
