//! JSON problem and certificate files.
//!
//! Files store PSD blocks as plain upper-triangle entries, column by column.
//! Internally off-diagonal element coordinates carry a factor `√2`, so the
//! loader multiplies element off-diagonals by `√2` and divides the matching
//! columns of `A` by `√2`; `A x` is unchanged.

use std::f64::consts::SQRT_2;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use symcone_core::linalg::Mat;
use symcone_core::solver::RescaleRecord;
use symcone_core::{Block, Certificate, CertificateKind, ConeSpec, Element, ProblemInstance, SolveStats};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{file}: at `{field}`: {message}")]
    Parse { file: String, field: String, message: String },
    #[error("{0}")]
    Structure(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ConeEntry {
    Nonneg { count: usize },
    Soc { dim: usize },
    Psd { order: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub cone: Vec<ConeEntry>,
    #[serde(rename = "A")]
    pub a: MatrixFile,
}

/// Cone-only file accepted by `generate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeFile {
    pub cone: Vec<ConeEntry>,
}

pub fn cone_spec(entries: &[ConeEntry]) -> Result<ConeSpec, FormatError> {
    let mut blocks = Vec::new();
    for e in entries {
        match *e {
            ConeEntry::Nonneg { count } => {
                if count == 0 {
                    return Err(FormatError::Structure("nonneg count must be positive".into()));
                }
                blocks.extend(std::iter::repeat_n(Block::Rank1, count));
            }
            ConeEntry::Soc { dim } => blocks.push(Block::Soc(dim)),
            ConeEntry::Psd { order } => blocks.push(Block::Psd(order)),
        }
    }
    ConeSpec::new(blocks).map_err(|e| FormatError::Structure(e.to_string()))
}

/// Inverse of [`cone_spec`]; runs of rank-one blocks collapse to `nonneg`.
pub fn cone_entries(spec: &ConeSpec) -> Vec<ConeEntry> {
    let mut out: Vec<ConeEntry> = Vec::new();
    for b in spec.blocks() {
        match (b, out.last_mut()) {
            (Block::Rank1, Some(ConeEntry::Nonneg { count })) => *count += 1,
            (Block::Rank1, _) => out.push(ConeEntry::Nonneg { count: 1 }),
            (Block::Soc(n), _) => out.push(ConeEntry::Soc { dim: *n }),
            (Block::Psd(n), _) => out.push(ConeEntry::Psd { order: *n }),
        }
    }
    out
}

/// Per-coordinate factor `internal = file · f`; `√2` on PSD off-diagonals.
fn coordinate_factors(spec: &ConeSpec) -> Vec<f64> {
    let mut f = Vec::with_capacity(spec.dim());
    for b in spec.blocks() {
        match *b {
            Block::Psd(n) => {
                for j in 0..n {
                    for i in 0..=j {
                        f.push(if i == j { 1.0 } else { SQRT_2 });
                    }
                }
            }
            _ => f.extend(std::iter::repeat_n(1.0, b.dim())),
        }
    }
    f
}

fn check_len(what: &str, got: usize, expected: usize) -> Result<(), FormatError> {
    if got == expected {
        Ok(())
    } else {
        Err(FormatError::Structure(format!("{what} has length {got}, expected {expected}")))
    }
}

pub fn element_from_file(spec: &ConeSpec, v: &[f64]) -> Result<Element, FormatError> {
    check_len("element", v.len(), spec.dim())?;
    Ok(Element::from_vec(v.iter().zip(coordinate_factors(spec)).map(|(x, f)| x * f).collect()))
}

pub fn element_to_file(spec: &ConeSpec, x: &Element) -> Vec<f64> {
    x.as_slice().iter().zip(coordinate_factors(spec)).map(|(v, f)| v / f).collect()
}

impl ProblemFile {
    pub fn to_instance(&self) -> Result<ProblemInstance, FormatError> {
        let spec = cone_spec(&self.cone)?;
        let a = &self.a;
        if a.cols != spec.dim() {
            return Err(FormatError::Structure(format!(
                "A has {} columns but the cone has dimension {}",
                a.cols,
                spec.dim()
            )));
        }
        check_len("A.data", a.data.len(), a.rows * a.cols)?;
        let f = coordinate_factors(&spec);
        let data = a.data.chunks(a.cols.max(1)).flat_map(|row| row.iter().zip(&f).map(|(v, s)| v / s)).collect();
        ProblemInstance::new(spec, Mat::from_row_major(a.rows, a.cols, data)).map_err(|e| FormatError::Structure(e.to_string()))
    }

    pub fn from_instance(inst: &ProblemInstance) -> ProblemFile {
        let spec = inst.spec();
        let f = coordinate_factors(spec);
        let a = inst.a();
        let data = (0..a.rows()).flat_map(|i| a.row(i).iter().zip(&f).map(|(v, s)| v * s).collect::<Vec<_>>()).collect();
        ProblemFile { cone: cone_entries(spec), a: MatrixFile { rows: a.rows(), cols: a.cols(), data } }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsFile {
    pub bp_iterations: usize,
    pub rescale_iterations: usize,
    pub eps_ledger: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub iteration: usize,
    /// 0-based block index.
    pub block: usize,
    pub rho: f64,
    /// `w_k` in file coordinates.
    pub w: Vec<f64>,
    pub w_eigenvalues: Vec<f64>,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CertificateFile {
    Primal {
        x: Vec<f64>,
        stats: StatsFile,
    },
    Dual {
        y: Vec<f64>,
        u: Vec<f64>,
        stats: StatsFile,
    },
    EpsilonInfeasible {
        block: usize,
        eps: f64,
        eps_k: f64,
        threshold: f64,
        trivial: bool,
        transcript: Vec<TranscriptEntry>,
        stats: StatsFile,
    },
    BudgetExceeded {
        stats: StatsFile,
    },
}

fn block_to_file(spec: &ConeSpec, k: usize, w: &[f64]) -> Vec<f64> {
    let r = spec.range(k);
    w.iter().zip(&coordinate_factors(spec)[r]).map(|(v, f)| v / f).collect()
}

fn block_from_file(spec: &ConeSpec, k: usize, w: &[f64]) -> Result<Vec<f64>, FormatError> {
    if k >= spec.num_blocks() {
        return Err(FormatError::Structure(format!("block index {k} out of range")));
    }
    let r = spec.range(k);
    check_len("transcript w", w.len(), r.len())?;
    Ok(w.iter().zip(&coordinate_factors(spec)[r]).map(|(v, f)| v * f).collect())
}

impl CertificateFile {
    pub fn from_certificate(spec: &ConeSpec, cert: &Certificate) -> CertificateFile {
        let s = &cert.stats;
        let stats = StatsFile {
            bp_iterations: s.bp_iterations,
            rescale_iterations: s.rescale_iterations,
            eps_ledger: s.eps_ledger.clone(),
        };
        match &cert.kind {
            CertificateKind::Primal { x } => CertificateFile::Primal { x: element_to_file(spec, x), stats },
            CertificateKind::Dual { y, u } => CertificateFile::Dual { y: element_to_file(spec, y), u: u.clone(), stats },
            CertificateKind::EpsilonInfeasible { block, eps, eps_k, threshold, trivial } => {
                let transcript = s
                    .transcript
                    .iter()
                    .map(|r| TranscriptEntry {
                        iteration: r.iteration,
                        block: r.block,
                        rho: r.rho,
                        w: block_to_file(spec, r.block, &r.w),
                        w_eigenvalues: spec.block_eigenvalues(r.block, &r.w).unwrap_or_default(),
                        delta: r.delta,
                    })
                    .collect();
                CertificateFile::EpsilonInfeasible {
                    block: *block,
                    eps: *eps,
                    eps_k: *eps_k,
                    threshold: *threshold,
                    trivial: *trivial,
                    transcript,
                    stats,
                }
            }
            CertificateKind::BudgetExceeded => CertificateFile::BudgetExceeded { stats },
        }
    }

    pub fn to_certificate(&self, spec: &ConeSpec) -> Result<Certificate, FormatError> {
        let to_stats = |s: &StatsFile, transcript| SolveStats {
            bp_iterations: s.bp_iterations,
            rescale_iterations: s.rescale_iterations,
            eps_ledger: s.eps_ledger.clone(),
            transcript,
        };
        Ok(match self {
            CertificateFile::Primal { x, stats } => Certificate {
                kind: CertificateKind::Primal { x: element_from_file(spec, x)? },
                stats: to_stats(stats, Vec::new()),
            },
            CertificateFile::Dual { y, u, stats } => Certificate {
                kind: CertificateKind::Dual { y: element_from_file(spec, y)?, u: u.clone() },
                stats: to_stats(stats, Vec::new()),
            },
            CertificateFile::EpsilonInfeasible { block, eps, eps_k, threshold, trivial, transcript, stats } => {
                let transcript = transcript
                    .iter()
                    .map(|t| {
                        Ok(RescaleRecord {
                            iteration: t.iteration,
                            block: t.block,
                            rho: t.rho,
                            w: block_from_file(spec, t.block, &t.w)?,
                            delta: t.delta,
                        })
                    })
                    .collect::<Result<Vec<_>, FormatError>>()?;
                Certificate {
                    kind: CertificateKind::EpsilonInfeasible {
                        block: *block,
                        eps: *eps,
                        eps_k: *eps_k,
                        threshold: *threshold,
                        trivial: *trivial,
                    },
                    stats: to_stats(stats, transcript),
                }
            }
            CertificateFile::BudgetExceeded { stats } => {
                Certificate { kind: CertificateKind::BudgetExceeded, stats: to_stats(stats, Vec::new()) }
            }
        })
    }
}

pub fn parse_json<T: DeserializeOwned>(file: &str, text: &str) -> Result<T, FormatError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| FormatError::Parse {
        file: file.to_string(),
        field: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, FormatError> {
    let name = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| FormatError::Io { path: name.clone(), source })?;
    parse_json(&name, &text)
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), FormatError> {
    fs::write(path, to_json(value)).map_err(|source| FormatError::Io { path: path.display().to_string(), source })
}

pub fn load(path: &Path) -> Result<ProblemInstance, FormatError> {
    read_json::<ProblemFile>(path)?.to_instance()
}

pub fn save_certificate(path: &Path, spec: &ConeSpec, cert: &Certificate) -> Result<(), FormatError> {
    write_json(path, &CertificateFile::from_certificate(spec, cert))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(json: &str) -> ProblemFile {
        parse_json("test", json).unwrap()
    }

    #[test]
    fn nonneg_pair() {
        let inst = problem(r#"{"cone":[{"type":"nonneg","count":2}],"A":{"rows":1,"cols":2,"data":[1,1]}}"#)
            .to_instance()
            .unwrap();
        assert_eq!(inst.spec().blocks(), &[Block::Rank1, Block::Rank1]);
        assert_eq!(inst.a().as_slice(), &[1.0, 1.0]);
    }

    #[test]
    fn psd_columns_are_rescaled() {
        let inst = problem(r#"{"cone":[{"type":"psd","order":2}],"A":{"rows":1,"cols":3,"data":[1,0,0]}}"#)
            .to_instance()
            .unwrap();
        assert_eq!(inst.a().as_slice(), &[1.0, 0.0, 0.0]);
        let inst = problem(r#"{"cone":[{"type":"psd","order":2}],"A":{"rows":1,"cols":3,"data":[1,2,0]}}"#)
            .to_instance()
            .unwrap();
        assert!((inst.a().as_slice()[1] - 2.0 / SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn a_x_is_preserved() {
        let pf = problem(
            r#"{"cone":[{"type":"soc","dim":3},{"type":"psd","order":2}],
                "A":{"rows":1,"cols":6,"data":[1,2,3,4,5,6]}}"#,
        );
        let inst = pf.to_instance().unwrap();
        let x_file = [0.5, -1.0, 2.0, 1.5, 0.25, -3.0];
        let x = element_from_file(inst.spec(), &x_file).unwrap();
        let direct: f64 = pf.a.data.iter().zip(&x_file).map(|(a, b)| a * b).sum();
        assert!((inst.apply(&x)[0] - direct).abs() < 1e-14);
    }

    #[test]
    fn problem_round_trip() {
        let pf = problem(
            r#"{"cone":[{"type":"nonneg","count":2},{"type":"psd","order":3}],
                "A":{"rows":1,"cols":8,"data":[1,2,3,4,5,6,7,8]}}"#,
        );
        let back = ProblemFile::from_instance(&pf.to_instance().unwrap());
        assert_eq!(back.cone, pf.cone);
        for (a, b) in back.a.data.iter().zip(&pf.a.data) {
            assert!((a - b).abs() <= 2.0 * f64::EPSILON * b.abs());
        }
    }

    #[test]
    fn diagnostics_name_the_field() {
        let err = parse_json::<ProblemFile>("p.json", r#"{"cone":[{"type":"soc","dim":"x"}],"A":{"rows":0,"cols":0,"data":[]}}"#)
            .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("cone[0]"), "{msg}");
        let err = problem(r#"{"cone":[{"type":"nonneg","count":2}],"A":{"rows":1,"cols":3,"data":[1,1,1]}}"#)
            .to_instance()
            .unwrap_err();
        assert!(matches!(err, FormatError::Structure(_)));
    }

    #[test]
    fn certificate_round_trip() {
        let spec = cone_spec(&[ConeEntry::Psd { order: 2 }, ConeEntry::Nonneg { count: 1 }]).unwrap();
        let cert = Certificate {
            kind: CertificateKind::EpsilonInfeasible { block: 0, eps: 1e-6, eps_k: -20.0, threshold: -13.1, trivial: false },
            stats: SolveStats {
                bp_iterations: 4,
                rescale_iterations: 1,
                eps_ledger: vec![-20.0, 0.0],
                transcript: vec![RescaleRecord { iteration: 0, block: 0, rho: 3.0, w: vec![1.0, 0.5, 2.0], delta: -20.0 }],
            },
        };
        let file = CertificateFile::from_certificate(&spec, &cert);
        let text = to_json(&file);
        let back: CertificateFile = parse_json("c", &text).unwrap();
        let cert2 = back.to_certificate(&spec).unwrap();
        assert_eq!(cert2.kind, cert.kind);
        let w2 = &cert2.stats.transcript[0].w;
        assert!(w2.iter().zip(&cert.stats.transcript[0].w).all(|(a, b)| (a - b).abs() < 1e-15));
    }
}
