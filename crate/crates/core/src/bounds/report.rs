use std::fmt::Write as _;

/// Which bound a report compares against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Theorem {
    /// Wasserstein bound with a Lyapunov function of the perturbed kernel.
    Thm31,
    /// Wasserstein bound with `Vt = 1`.
    TrivialLyapunov,
    /// Distance between the stationary laws.
    Stationary,
    /// V-norm bound with a Lyapunov function of the perturbed kernel.
    Geom1,
    /// V-norm bound with a Lyapunov function of the ideal kernel.
    Geom2,
    /// Total-variation bound.
    Geom3,
    /// Total-variation distance between the stationary laws.
    Geom3Stationary,
    /// Monte-Carlo AR(1) run.
    Ar1,
    /// Monte-Carlo approximate Metropolis-Hastings run.
    MetroGeom,
}

impl Theorem {
    pub const FINITE: [Theorem; 7] = [
        Theorem::Thm31,
        Theorem::TrivialLyapunov,
        Theorem::Stationary,
        Theorem::Geom1,
        Theorem::Geom2,
        Theorem::Geom3,
        Theorem::Geom3Stationary,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Theorem::Thm31 => "wasserstein",
            Theorem::TrivialLyapunov => "wasserstein-trivial-lyapunov",
            Theorem::Stationary => "wasserstein-stationary",
            Theorem::Geom1 => "vnorm-geom1",
            Theorem::Geom2 => "vnorm-geom2",
            Theorem::Geom3 => "tv-geom3",
            Theorem::Geom3Stationary => "tv-geom3-stationary",
            Theorem::Ar1 => "ar1",
            Theorem::MetroGeom => "metro-geom",
        }
    }

    pub fn parse(s: &str) -> Option<Theorem> {
        Theorem::FINITE
            .into_iter()
            .chain([Theorem::Ar1, Theorem::MetroGeom])
            .find(|t| t.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub n: u64,
    pub distance: f64,
    pub bound: f64,
    pub slack: f64,
    /// Standard error of `distance` for Monte-Carlo rows.
    pub se: Option<f64>,
}

/// Per-step table of a distance against its theoretical bound.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationReport {
    pub theorem: Theorem,
    /// Constants the bound was evaluated with, in insertion order.
    pub constants: Vec<(String, f64)>,
    pub rows: Vec<ReportRow>,
}

impl PerturbationReport {
    pub fn new(theorem: Theorem) -> Self {
        Self {
            theorem,
            constants: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn constant(mut self, name: &str, value: f64) -> Self {
        self.constants.push((name.to_string(), value));
        self
    }

    pub fn push(&mut self, n: u64, distance: f64, bound: f64) {
        self.rows.push(ReportRow {
            n,
            distance,
            bound,
            slack: bound - distance,
            se: None,
        });
    }

    pub fn push_mc(&mut self, n: u64, distance: f64, se: f64, bound: f64) {
        self.rows.push(ReportRow {
            n,
            distance,
            bound,
            slack: bound - distance,
            se: Some(se),
        });
    }

    pub fn min_slack(&self) -> f64 {
        self.rows.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min)
    }

    /// Exact rows need `slack >= -tol`; Monte-Carlo rows `slack >= -3 SE`.
    pub fn holds(&self, tol: f64) -> bool {
        self.rows.iter().all(|r| match r.se {
            Some(se) => r.slack >= -3.0 * se - tol,
            None => r.slack >= -tol,
        })
    }

    pub fn constant_value(&self, name: &str) -> Option<f64> {
        self.constants.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }

    /// `n,distance,bound,slack`, shortest round-trip decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,distance,bound,slack\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{}", r.n, r.distance, r.bound, r.slack);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trips() {
        let mut r = PerturbationReport::new(Theorem::Thm31).constant("C", 1.0);
        r.push(0, 0.1, 0.30000000000000004);
        r.push(1, 1e-20, 2.0);
        let csv = r.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("n,distance,bound,slack"));
        let first: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(first[2], 0.30000000000000004);
        assert_eq!(first[3], 0.30000000000000004 - 0.1);
        let second: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(second[1], 1e-20);
        assert!((r.min_slack() - 0.20000000000000004).abs() < 1e-16);
        assert_eq!(r.constant_value("C"), Some(1.0));
    }

    #[test]
    fn names_parse_back() {
        for t in Theorem::FINITE {
            assert_eq!(Theorem::parse(t.name()), Some(t));
        }
        assert_eq!(Theorem::parse("nope"), None);
    }
}
