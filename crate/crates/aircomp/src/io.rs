//! JSON and CSV formats. External indices are 1-based.

use std::io::Write;

use aircomp_core::kkt::{Case, Diagnostics};
use aircomp_core::orthogonal::OrthogonalSolution;
use aircomp_core::{CandidateSolution, Certificate, ChannelVector, ComputationGroups, FeasibilityReport, Instance};
use serde::{Deserialize, Serialize};

pub const CSV_VERSION_LINE: &str = "# aircomp-robust v1";

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("sensor index 0 in group {0}; indices are 1-based")]
    ZeroIndex(usize),
    #[error(transparent)]
    Model(#[from] aircomp_core::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub h: Vec<f64>,
    pub groups: Vec<Vec<usize>>,
    #[serde(rename = "P")]
    pub power: f64,
    pub sigma2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phases: Option<Vec<f64>>,
}

impl InstanceFile {
    pub fn to_instance(&self) -> Result<Instance, FormatError> {
        let mut groups = Vec::with_capacity(self.groups.len());
        for (m, g) in self.groups.iter().enumerate() {
            let zero_based = g
                .iter()
                .map(|&k| k.checked_sub(1).ok_or(FormatError::ZeroIndex(m + 1)))
                .collect::<Result<Vec<_>, _>>()?;
            groups.push(zero_based);
        }
        let channels = match &self.phases {
            Some(p) => ChannelVector::with_phases(self.h.clone(), p.clone())?,
            None => ChannelVector::new(self.h.clone())?,
        };
        Ok(Instance::new(channels, ComputationGroups::new(groups), self.power, self.sigma2)?)
    }

    pub fn from_instance(instance: &Instance) -> Self {
        Self {
            h: instance.h().to_vec(),
            groups: one_based_groups(instance.groups.groups()),
            power: instance.power,
            sigma2: instance.noise,
            phases: instance.channels.phases().map(<[f64]>::to_vec),
        }
    }

    pub fn parse(text: &str) -> Result<Self, FormatError> {
        Ok(serde_json::from_str(text)?)
    }
}

fn one_based_groups(groups: &[Vec<usize>]) -> Vec<Vec<usize>> {
    groups.iter().map(|g| g.iter().map(|k| k + 1).collect()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateJson {
    pub licq_ok: bool,
    pub jacobian_rank: usize,
    /// (positive, negative, zero) eigenvalue counts of the KKT matrix.
    pub inertia: [usize; 3],
    pub strict_complementarity: bool,
    pub is_local_min: bool,
    pub hessian_fd_error: f64,
}

impl From<&Certificate> for CertificateJson {
    fn from(c: &Certificate) -> Self {
        Self {
            licq_ok: c.licq_ok,
            jacobian_rank: c.jacobian_rank,
            inertia: [c.inertia_k.rho, c.inertia_k.eta, c.inertia_k.theta],
            strict_complementarity: c.strict_complementarity,
            is_local_min: c.is_local_min,
            hessian_fd_error: c.hessian_fd_error,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsJson {
    /// `c`, `d1` or `d2`: which groups keep free sensors.
    pub case: String,
    pub stationarity_residual: f64,
    pub equality_residual: f64,
    pub mu_spread: f64,
    pub window_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateJson>,
}

impl DiagnosticsJson {
    fn new(case: Case, d: &Diagnostics) -> Self {
        Self {
            case: match case {
                Case::C => "c".into(),
                Case::D { free } => format!("d{}", free + 1),
            },
            stationarity_residual: d.stationarity_residual,
            equality_residual: d.equality_residual,
            mu_spread: d.mu_spread,
            window_ok: d.window_ok,
            certificate: d.certificate.as_ref().map(CertificateJson::from),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateJson {
    pub b: Vec<f64>,
    #[serde(rename = "E")]
    pub e: [f64; 2],
    pub lambda: Vec<f64>,
    pub mu: f64,
    pub p1: usize,
    pub p2: usize,
    pub worst_mse: f64,
    pub diagnostics: DiagnosticsJson,
}

impl From<&CandidateSolution> for CandidateJson {
    fn from(c: &CandidateSolution) -> Self {
        Self {
            b: c.b.b.clone(),
            e: c.e,
            lambda: c.lambda.clone(),
            mu: c.mu,
            p1: c.pair.p1,
            p2: c.pair.p2,
            worst_mse: c.worst_mse,
            diagnostics: DiagnosticsJson::new(c.case, &c.diagnostics),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrthogonalJson {
    pub real_chain: Vec<usize>,
    pub imag_chain: Vec<usize>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub mse: Vec<f64>,
    pub worst_mse: f64,
}

impl From<&OrthogonalSolution> for OrthogonalJson {
    fn from(s: &OrthogonalSolution) -> Self {
        Self {
            real_chain: s.assignment.real.iter().map(|m| m + 1).collect(),
            imag_chain: s.assignment.imag.iter().map(|m| m + 1).collect(),
            b: s.tx.b.clone(),
            c: s.rx.c.clone(),
            mse: s.mse.clone(),
            worst_mse: s.worst,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityRow {
    pub delta_d: i64,
    pub sigma_lower: f64,
    pub sigma_exact: f64,
    pub sigma_upper: f64,
    pub sigma_approx: f64,
    pub feasible: bool,
}

impl From<&FeasibilityReport> for FeasibilityRow {
    fn from(r: &FeasibilityReport) -> Self {
        Self {
            delta_d: r.delta_d,
            sigma_lower: r.sigma_lower,
            sigma_exact: r.sigma_exact,
            sigma_upper: r.sigma_upper,
            sigma_approx: r.sigma_approx,
            feasible: r.feasible,
        }
    }
}

/// Writes the version line, a header row and one row per record.
pub fn write_csv<W: Write, R: Serialize>(mut out: W, rows: &[R]) -> Result<(), FormatError> {
    writeln!(out, "{CSV_VERSION_LINE}")?;
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string<R: Serialize>(rows: &[R]) -> Result<String, FormatError> {
    let mut buf = Vec::new();
    write_csv(&mut buf, rows)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

/// Gnuplot script plotting column `y` against column 1 of `csv_path`.
pub fn gnuplot_script(csv_path: &str, title: &str, ylabel: &str, y: usize) -> String {
    format!(
        "set datafile separator ','\n\
         set datafile commentschars '#'\n\
         set key autotitle columnhead\n\
         set title '{title}'\n\
         set xlabel 'SNR [dB]'\n\
         set ylabel '{ylabel}'\n\
         set grid\n\
         plot '{csv_path}' using 1:{y} with linespoints\n"
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instance_round_trip_is_one_based() {
        let text = r#"{"h": [2.0, 1.0, 0.5], "groups": [[1], [2, 3]], "P": 4.0, "sigma2": 0.5}"#;
        let f = InstanceFile::parse(text).unwrap();
        let i = f.to_instance().unwrap();
        assert_eq!(i.groups.groups(), &[vec![0], vec![1, 2]]);
        assert_eq!(i.power, 4.0);
        assert_eq!(InstanceFile::from_instance(&i), f);
        let back: serde_json::Value = serde_json::to_value(&f).unwrap();
        assert_eq!(back["P"], 4.0);
        assert!(back.get("phases").is_none());
    }

    #[test]
    fn zero_index_is_rejected() {
        let f = InstanceFile::parse(r#"{"h": [1.0, 1.0], "groups": [[0], [1]], "P": 1, "sigma2": 1}"#).unwrap();
        assert!(matches!(f.to_instance(), Err(FormatError::ZeroIndex(1))));
    }

    #[test]
    fn candidate_json_fields() {
        let i = Instance::two_sum(vec![2.0, 1.0], 1, 1.0, 1.0).unwrap();
        let c = aircomp_core::solve_two_sum(&i).unwrap();
        let v = serde_json::to_value(CandidateJson::from(&c)).unwrap();
        for key in ["b", "E", "lambda", "mu", "p1", "p2", "worst_mse", "diagnostics"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["diagnostics"]["case"], "d1");
        assert_eq!(v["diagnostics"]["certificate"]["is_local_min"], true);
    }

    #[test]
    fn feasibility_row_columns() {
        let i = Instance::two_sum(vec![0.7, 1.0, 1.0], 1, 1.0, 1.0).unwrap();
        let r = aircomp_core::is_feasible(&i).unwrap();
        let text = csv_string(&[FeasibilityRow::from(&r)]).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(CSV_VERSION_LINE));
        assert_eq!(
            lines.next(),
            Some("delta_d,sigma_lower,sigma_exact,sigma_upper,sigma_approx,feasible")
        );
        assert!(lines.next().unwrap().starts_with("1,2.0"));
    }
}
