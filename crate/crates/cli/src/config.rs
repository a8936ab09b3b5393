//! Run configuration: defaults, then the optional JSON config file, then
//! command-line flags. FBHEAT_PRECISION supplies the default precision.

use crate::report::Format;
use crate::Failure;
use fbheat::spectrum::PrecisionMode;
use serde::Deserialize;
use std::path::PathBuf;

pub const PRECISION_ENV: &str = "FBHEAT_PRECISION";

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub epsilon: f64,
    pub truncation: usize,
    pub grid_size: usize,
    pub precision: PrecisionMode,
    pub output_format: Format,
    pub output_path: Option<PathBuf>,
    pub t: f64,
    pub p_list: Vec<f64>,
    pub mesh_size: usize,
    pub k: Option<usize>,
    pub truncations: Vec<usize>,
    pub input: Option<PathBuf>,
}

/// Every field optional; both the config file and the flags fill one of these.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Partial {
    pub epsilon: Option<OneOrMany>,
    pub truncation: Option<usize>,
    pub grid_size: Option<usize>,
    pub precision: Option<String>,
    pub output_format: Option<Format>,
    pub output_path: Option<PathBuf>,
    pub t: Option<f64>,
    pub p_list: Option<Vec<f64>>,
    pub mesh_size: Option<usize>,
    pub k: Option<usize>,
    pub truncations: Option<Vec<usize>>,
    pub input: Option<PathBuf>,
    pub jobs: Option<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    fn into_vec(self) -> Vec<f64> {
        match self {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(v) => v,
        }
    }
}

impl Partial {
    pub fn from_json(text: &str) -> Result<Self, Failure> {
        serde_json::from_str(text).map_err(|e| Failure::Precondition(format!("config file: {e}")))
    }

    /// Fields set in `over` win.
    pub fn overlay(self, over: Partial) -> Partial {
        Partial {
            epsilon: over.epsilon.or(self.epsilon),
            truncation: over.truncation.or(self.truncation),
            grid_size: over.grid_size.or(self.grid_size),
            precision: over.precision.or(self.precision),
            output_format: over.output_format.or(self.output_format),
            output_path: over.output_path.or(self.output_path),
            t: over.t.or(self.t),
            p_list: over.p_list.or(self.p_list),
            mesh_size: over.mesh_size.or(self.mesh_size),
            k: over.k.or(self.k),
            truncations: over.truncations.or(self.truncations),
            input: over.input.or(self.input),
            jobs: over.jobs.or(self.jobs),
        }
    }

    /// One config per ε of the sweep, plus the job count.
    pub fn resolve(self, env_precision: Option<String>) -> Result<(Vec<RunConfig>, usize), Failure> {
        let epsilons = self.epsilon.map_or(vec![0.5], OneOrMany::into_vec);
        if epsilons.is_empty() {
            return Err(Failure::Usage("--epsilon needs at least one value".into()));
        }
        let truncation = self.truncation.unwrap_or(64);
        if truncation < 1 {
            return Err(Failure::Precondition("truncation must be at least 1".into()));
        }
        let grid_size = self.grid_size.unwrap_or((4 * truncation).max(256));
        if grid_size < 4 * truncation {
            return Err(Failure::Precondition(format!(
                "grid_size {grid_size} must be at least 4 * truncation = {}",
                4 * truncation
            )));
        }
        let precision = match self.precision.or(env_precision) {
            Some(s) => s.parse::<PrecisionMode>().map_err(|e| Failure::Precondition(e.to_string()))?,
            None => PrecisionMode::Standard,
        };
        let jobs = self.jobs.unwrap_or(1);
        if jobs == 0 {
            return Err(Failure::Usage("--jobs must be at least 1".into()));
        }
        let multi = epsilons.len() > 1;
        let format = self.output_format.unwrap_or(Format::Json);
        let configs = epsilons
            .into_iter()
            .map(|epsilon| RunConfig {
                epsilon,
                truncation,
                grid_size,
                precision,
                output_format: format,
                output_path: self.output_path.as_ref().map(|p| if multi { sweep_path(p, epsilon) } else { p.clone() }),
                t: self.t.unwrap_or(1.0),
                p_list: self.p_list.clone().unwrap_or_else(|| vec![1.0]),
                mesh_size: self.mesh_size.unwrap_or(4096),
                k: self.k,
                truncations: self.truncations.clone().unwrap_or_else(|| vec![16, 32, 64, 128]),
                input: self.input.clone(),
            })
            .collect();
        Ok((configs, jobs))
    }
}

/// `out.json` becomes `out_eps0.5.json` for one job of a sweep.
fn sweep_path(p: &std::path::Path, eps: f64) -> PathBuf {
    let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match p.extension() {
        Some(ext) => format!("{stem}_eps{eps}.{}", ext.to_string_lossy()),
        None => format!("{stem}_eps{eps}"),
    };
    p.with_file_name(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file = Partial::from_json(r#"{"epsilon": 1.0, "truncation": 32, "precision": "extended"}"#).unwrap();
        let flags = Partial { truncation: Some(16), ..Default::default() };
        let (c, _) = file.overlay(flags).resolve(None).unwrap();
        assert_eq!((c[0].epsilon, c[0].truncation, c[0].precision), (1.0, 16, PrecisionMode::Extended));
    }

    #[test]
    fn environment_is_only_a_default() {
        let (c, _) = Partial::default().resolve(Some("extended".into())).unwrap();
        assert_eq!(c[0].precision, PrecisionMode::Extended);
        let p = Partial { precision: Some("standard".into()), ..Default::default() };
        assert_eq!(p.resolve(Some("extended".into())).unwrap().0[0].precision, PrecisionMode::Standard);
    }

    #[test]
    fn unknown_config_key_rejected() {
        assert!(matches!(Partial::from_json(r#"{"epsilom": 1.0}"#), Err(Failure::Precondition(_))));
    }

    #[test]
    fn grid_must_cover_truncation() {
        let p = Partial { truncation: Some(64), grid_size: Some(128), ..Default::default() };
        assert!(matches!(p.resolve(None), Err(Failure::Precondition(_))));
    }

    #[test]
    fn sweep_outputs_get_distinct_names() {
        let p = Partial {
            epsilon: Some(OneOrMany::Many(vec![0.5, 1.5])),
            output_path: Some("runs/out.csv".into()),
            ..Default::default()
        };
        let (c, _) = p.resolve(None).unwrap();
        assert_eq!(c[1].output_path.as_deref(), Some(std::path::Path::new("runs/out_eps1.5.csv")));
    }
}
