//! Serialization of trajectories and certificate results: a fixed-layout
//! CSV for the state history (written with full precision so reruns can be
//! compared byte for byte) and a JSON summary for the certificate suite.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::coupling::Trajectory;
use crate::diagnostics::CertificateReport;
use crate::{Error, Result};

const CSV_HEADER: &str = "step,time,cell,rho,z,big_r,big_z,ratio";

/// Render a trajectory as CSV text: one row per (snapshot, cell), snapshot
/// 0 being the initial data. Formatting is fixed at 16 significant hex-free
/// digits, so identical runs produce identical bytes.
pub fn trajectory_to_csv(traj: &Trajectory) -> String {
    let n = traj.mesh().num_cells();
    let mut out = String::with_capacity((traj.steps.len() + 1) * n * 96);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for step in 0..=traj.steps.len() {
        let time = step as f64 * traj.params().dt;
        let st = traj.state_at(step);
        for c in 0..n {
            let _ = writeln!(
                out,
                "{step},{time:.16e},{c},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                st.rho[c], st.z[c], st.big_r[c], st.big_z[c], st.ratio[c]
            );
        }
    }
    out
}

pub fn write_trajectory_csv(traj: &Trajectory, path: &Path) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(trajectory_to_csv(traj).as_bytes())?;
    Ok(())
}

/// One snapshot read back from CSV.
#[derive(Debug, Clone)]
pub struct CsvSnapshot {
    pub step: usize,
    pub time: f64,
    pub rho: Vec<f64>,
    pub z: Vec<f64>,
    pub big_r: Vec<f64>,
    pub big_z: Vec<f64>,
    pub ratio: Vec<f64>,
}

/// A trajectory read back from CSV; snapshots are complete and ordered.
#[derive(Debug, Clone)]
pub struct CsvTrajectory {
    pub snapshots: Vec<CsvSnapshot>,
}

impl CsvTrajectory {
    pub fn cells(&self) -> usize {
        self.snapshots.first().map_or(0, |s| s.rho.len())
    }
}

/// Parse trajectory CSV. Every malformed input yields an error, never a
/// panic; rows must be grouped by snapshot with cells numbered 0..n.
pub fn parse_trajectory_csv(text: &str) -> Result<CsvTrajectory> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim_end() == CSV_HEADER => {}
        Some(h) => {
            return Err(Error::Parse(format!(
                "unexpected trajectory header {h:?}; expected {CSV_HEADER:?}"
            )))
        }
        None => return Err(Error::Parse("empty trajectory file".into())),
    }
    let mut snapshots: Vec<CsvSnapshot> = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let mut field = |name: &str| -> Result<&str> {
            parts
                .next()
                .ok_or_else(|| Error::Parse(format!("line {}: missing {name}", lineno + 2)))
        };
        let step: usize = field("step")?
            .parse()
            .map_err(|e| Error::Parse(format!("line {}: bad step ({e})", lineno + 2)))?;
        let mut num = |name: &str| -> Result<f64> {
            let raw = field(name)?;
            let v: f64 = raw
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: bad {name} ({e})", lineno + 2)))?;
            if !v.is_finite() {
                return Err(Error::Parse(format!("line {}: nonfinite {name}", lineno + 2)));
            }
            Ok(v)
        };
        let time = num("time")?;
        let cell = num("cell")? as usize;
        let rho = num("rho")?;
        let z = num("z")?;
        let big_r = num("big_r")?;
        let big_z = num("big_z")?;
        let ratio = num("ratio")?;
        if parts.next().is_some() {
            return Err(Error::Parse(format!("line {}: trailing fields", lineno + 2)));
        }
        let need_new = snapshots.last().is_none_or(|s| s.step != step);
        if need_new {
            if snapshots.last().is_some_and(|s| step <= s.step) {
                return Err(Error::Parse(format!(
                    "line {}: snapshot index {step} out of order",
                    lineno + 2
                )));
            }
            snapshots.push(CsvSnapshot {
                step,
                time,
                rho: Vec::new(),
                z: Vec::new(),
                big_r: Vec::new(),
                big_z: Vec::new(),
                ratio: Vec::new(),
            });
        }
        let snap = snapshots.last_mut().unwrap();
        if cell != snap.rho.len() {
            return Err(Error::Parse(format!(
                "line {}: expected cell {}, found {cell}",
                lineno + 2,
                snap.rho.len()
            )));
        }
        snap.rho.push(rho);
        snap.z.push(z);
        snap.big_r.push(big_r);
        snap.big_z.push(big_z);
        snap.ratio.push(ratio);
    }
    if snapshots.is_empty() {
        return Err(Error::Parse("trajectory file holds no rows".into()));
    }
    let n = snapshots[0].rho.len();
    if n == 0 {
        return Err(Error::Parse("first snapshot holds no cells".into()));
    }
    for s in &snapshots {
        if s.rho.len() != n {
            return Err(Error::Parse(format!(
                "snapshot {} has {} cells, expected {n}",
                s.step,
                s.rho.len()
            )));
        }
    }
    Ok(CsvTrajectory { snapshots })
}

pub fn read_trajectory_csv(path: &Path) -> Result<CsvTrajectory> {
    parse_trajectory_csv(&std::fs::read_to_string(path)?)
}

/// Summary of a certificate run, serialized to JSON.
#[derive(Debug, Clone, Serialize)]
pub struct CertificateSuite {
    pub scenario: String,
    pub certificates: Vec<CertificateReport>,
    pub all_passed: bool,
}

impl CertificateSuite {
    pub fn new(scenario: &str, certificates: Vec<CertificateReport>) -> Self {
        let all_passed = certificates.iter().all(|c| c.passed);
        CertificateSuite { scenario: scenario.to_string(), certificates, all_passed }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| Error::Parse(format!("report serialization failed: {e}")))
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::run_level1;
    use crate::scenario::bundled_scenario;

    fn tiny_trajectory() -> Trajectory {
        let mut sc = bundled_scenario("constant").unwrap();
        sc.params.total_time = 0.03;
        run_level1(&sc).unwrap()
    }

    #[test]
    fn csv_roundtrip_preserves_values() {
        let traj = tiny_trajectory();
        let text = trajectory_to_csv(&traj);
        let back = parse_trajectory_csv(&text).unwrap();
        assert_eq!(back.snapshots.len(), traj.steps.len() + 1);
        assert_eq!(back.cells(), traj.mesh().num_cells());
        let last = back.snapshots.last().unwrap();
        let fs = traj.final_state();
        for c in 0..back.cells() {
            assert_eq!(last.big_r[c], fs.big_r[c]);
            assert_eq!(last.ratio[c], fs.ratio[c]);
        }
    }

    #[test]
    fn csv_rendering_is_deterministic() {
        let a = trajectory_to_csv(&tiny_trajectory());
        let b = trajectory_to_csv(&tiny_trajectory());
        assert_eq!(a, b);
    }

    #[test]
    fn malformed_csv_is_rejected() {
        for bad in [
            "",
            "nonsense header\n1,2,3",
            "step,time,cell,rho,z,big_r,big_z,ratio\n0,0.0,0,1.0,1.0,1.0",
            "step,time,cell,rho,z,big_r,big_z,ratio\n0,0.0,5,1,1,1,1,1",
            "step,time,cell,rho,z,big_r,big_z,ratio\n0,0.0,0,NaN,1,1,1,1",
            "step,time,cell,rho,z,big_r,big_z,ratio\nx,0.0,0,1,1,1,1,1",
            "step,time,cell,rho,z,big_r,big_z,ratio\n1,0.0,0,1,1,1,1,1\n0,0.0,0,1,1,1,1,1",
        ] {
            assert!(parse_trajectory_csv(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn suite_json_reports_verdict() {
        let suite = CertificateSuite::new(
            "demo",
            vec![
                CertificateReport::bounded("alpha", 0.0, 1e-10),
                CertificateReport::bounded("beta", 2.0, 1.0),
            ],
        );
        assert!(!suite.all_passed);
        let json = suite.to_json().unwrap();
        assert!(json.contains("\"beta\""));
        assert!(json.contains("\"passed\": false"));
    }
}
