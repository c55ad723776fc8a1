//! Parameter scans over one or two axes, written as plot-ready CSV.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::analytic::{delta_opt, rates_weak_drive, RateResult, SteadyState};
use crate::config::{emit, params_hash, ParamFile};
use crate::error::{Error, Result};
use crate::liouvillian::{liouvillian_rates, TruncationOptions};
use crate::model::SystemParams;

/// Fields a scan axis may vary.
pub const AXIS_NAMES: &[&str] = &[
    "gamma", "kappa", "g", "phi", "omega", "delta", "delta_c", "eta", "theta_L", "theta_c",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Analytic,
    Liouvillian,
}

impl Engine {
    pub fn name(&self) -> &'static str {
        match self {
            Engine::Analytic => "analytic",
            Engine::Liouvillian => "liouvillian",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(Engine::Analytic),
            "liouvillian" => Ok(Engine::Liouvillian),
            other => Err(Error::InvalidParameter {
                name: "engine",
                reason: format!("unknown engine `{other}`"),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Output {
    NSt,
    W,
    APlus,
    AMinus,
    D,
}

impl Output {
    pub const ALL: [Output; 5] = [
        Output::NSt,
        Output::W,
        Output::APlus,
        Output::AMinus,
        Output::D,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Output::NSt => "n_st",
            Output::W => "w",
            Output::APlus => "a_plus",
            Output::AMinus => "a_minus",
            Output::D => "d",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Output::ALL
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| Error::InvalidParameter {
                name: "outputs",
                reason: format!("unknown output `{s}`"),
            })
    }

    /// `None` for `n_st` in a heating region.
    fn value(&self, r: &RateResult) -> Option<f64> {
        match self {
            Output::NSt => r.n_st.value(),
            Output::W => Some(r.w),
            Output::APlus => Some(r.a_plus),
            Output::AMinus => Some(r.a_minus),
            Output::D => Some(r.d),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: String,
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

impl Axis {
    pub fn new(name: &str, start: f64, end: f64, points: usize) -> Result<Self> {
        let axis = Axis {
            name: name.to_string(),
            start,
            end,
            points,
        };
        axis.validate()?;
        Ok(axis)
    }

    /// Parses `name:start:end:points`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter {
            name: "axis",
            reason: format!("expected name:start:end:points, got `{s}`"),
        };
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 4 {
            return Err(bad());
        }
        let num = |t: &str| crate::config::parse_number(t).ok_or_else(bad);
        let points = parts[3].trim().parse::<usize>().map_err(|_| bad())?;
        Axis::new(parts[0].trim(), num(parts[1])?, num(parts[2])?, points)
    }

    fn validate(&self) -> Result<()> {
        if !AXIS_NAMES.contains(&self.name.as_str()) {
            return Err(Error::InvalidParameter {
                name: "axis",
                reason: format!("`{}` is not a scannable parameter", self.name),
            });
        }
        if !(self.start.is_finite() && self.end.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "axis",
                reason: "range must be finite".into(),
            });
        }
        if self.points < 2 {
            return Err(Error::InvalidParameter {
                name: "axis",
                reason: "need at least 2 points".into(),
            });
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let step = (self.end - self.start) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.end
                } else {
                    self.start + step * i as f64
                }
            })
            .collect()
    }
}

pub fn set_param(p: &mut SystemParams, name: &str, value: f64) -> Result<()> {
    match name {
        "gamma" => p.gamma = value,
        "kappa" => p.kappa = value,
        "g" => p.g = value,
        "phi" => p.phi = value,
        "omega" => p.omega = value,
        "delta" => p.delta = value,
        "delta_c" => p.delta_c = value,
        "eta" => p.eta = value,
        "theta_L" => p.theta_l = value,
        "theta_c" => p.theta_c = value,
        other => {
            return Err(Error::InvalidParameter {
                name: "axis",
                reason: format!("`{other}` is not a scannable parameter"),
            })
        }
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct ScanSpec {
    pub base: ParamFile,
    pub axis1: Axis,
    pub axis2: Option<Axis>,
    pub outputs: Vec<Output>,
    pub engine: Engine,
    /// Sets `Delta = Delta_opt(delta_c)` in every cell after the axes.
    pub along_delta_opt: bool,
    pub truncation: TruncationOptions,
}

impl ScanSpec {
    pub fn new(base: ParamFile, axis1: Axis) -> Self {
        ScanSpec {
            base,
            axis1,
            axis2: None,
            outputs: Output::ALL.to_vec(),
            engine: Engine::Analytic,
            along_delta_opt: false,
            truncation: TruncationOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.axis1.validate()?;
        if let Some(a) = &self.axis2 {
            a.validate()?;
            if a.name == self.axis1.name {
                return Err(Error::InvalidParameter {
                    name: "axis",
                    reason: "both axes vary the same parameter".into(),
                });
            }
        }
        if self.along_delta_opt
            && [Some(&self.axis1), self.axis2.as_ref()]
                .iter()
                .flatten()
                .any(|a| a.name == "delta")
        {
            return Err(Error::InvalidParameter {
                name: "axis",
                reason: "`delta` cannot be scanned along Delta_opt".into(),
            });
        }
        if self.outputs.is_empty() {
            return Err(Error::InvalidParameter {
                name: "outputs",
                reason: "nothing to compute".into(),
            });
        }
        Ok(())
    }

    fn cell_params(&self, x: f64, y: Option<f64>) -> Result<SystemParams> {
        let mut p = self.base.params;
        set_param(&mut p, &self.axis1.name, x)?;
        if let (Some(a), Some(y)) = (&self.axis2, y) {
            set_param(&mut p, &a.name, y)?;
        }
        if self.along_delta_opt {
            p.delta = delta_opt(p.delta_c, &p)?;
        }
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub x: f64,
    pub y: Option<f64>,
    pub delta: f64,
    pub result: std::result::Result<RateResult, Error>,
}

/// Row-major cells: `axis2` varies fastest.
#[derive(Debug, Clone)]
pub struct ScanResult {
    pub spec: ScanSpec,
    pub cells: Vec<Cell>,
}

/// Evaluates every cell in parallel; a failing cell never aborts the scan.
pub fn run_scan(spec: &ScanSpec) -> Result<ScanResult> {
    spec.validate()?;
    let ys: Vec<Option<f64>> = match &spec.axis2 {
        Some(a) => a.values().into_iter().map(Some).collect(),
        None => vec![None],
    };
    let coords: Vec<(f64, Option<f64>)> = spec
        .axis1
        .values()
        .into_iter()
        .flat_map(|x| ys.iter().map(move |y| (x, *y)))
        .collect();
    let cells = coords
        .par_iter()
        .map(|&(x, y)| {
            let params = spec.cell_params(x, y);
            let delta = params.as_ref().map_or(f64::NAN, |p| p.delta);
            let result = params.and_then(|p| match spec.engine {
                Engine::Analytic => rates_weak_drive(&p, &spec.base.emission),
                Engine::Liouvillian => {
                    liouvillian_rates(&p, &spec.base.emission, spec.truncation).map(|r| r.rates)
                }
            });
            Cell {
                x,
                y,
                delta,
                result,
            }
        })
        .collect();
    Ok(ScanResult {
        spec: spec.clone(),
        cells,
    })
}

fn metadata(spec: &ScanSpec, out: &mut String) {
    let _ = writeln!(out, "# cavcool {} scan", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(out, "# engine = {}", spec.engine.name());
    let _ = writeln!(out, "# params_hash = {}", params_hash(&spec.base));
    let _ = writeln!(out, "# emission = {}", spec.base.emission.name());
    if spec.along_delta_opt {
        out.push_str("# delta follows Delta_opt(delta_c)\n");
    }
    for line in emit(&spec.base).lines() {
        let _ = writeln!(out, "# param {line}");
    }
}

/// Recovers the base parameter file from the `# param` header lines.
pub fn parse_metadata(csv: &str) -> Result<ParamFile> {
    let text: String = csv
        .lines()
        .filter_map(|l| l.strip_prefix("# param "))
        .map(|l| format!("{l}\n"))
        .collect();
    crate::config::parse(&text)
}

fn fmt(v: f64) -> String {
    format!("{v:e}")
}

impl ScanResult {
    /// Columns: axes, `delta` (when it follows `Delta_opt`), requested
    /// outputs, `regime` (`cooling`, `heating` or `error`) and `error`.
    /// Heating cells carry `heating` in place of `n_st`; failed cells carry
    /// `error` in every output column and an error code.
    pub fn to_csv(&self) -> String {
        let spec = &self.spec;
        let mut out = String::new();
        metadata(spec, &mut out);
        let mut header = vec![spec.axis1.name.clone()];
        if let Some(a) = &spec.axis2 {
            header.push(a.name.clone());
        }
        if spec.along_delta_opt {
            header.push("delta".into());
        }
        header.extend(spec.outputs.iter().map(|o| o.name().to_string()));
        header.push("regime".into());
        header.push("error".into());
        out.push_str(&header.join(","));
        out.push('\n');
        for c in &self.cells {
            let mut row = vec![fmt(c.x)];
            if let Some(y) = c.y {
                row.push(fmt(y));
            }
            if spec.along_delta_opt {
                row.push(if c.delta.is_finite() {
                    fmt(c.delta)
                } else {
                    "error".into()
                });
            }
            match &c.result {
                Ok(r) => {
                    for o in &spec.outputs {
                        row.push(o.value(r).map_or_else(|| "heating".to_string(), fmt));
                    }
                    row.push(
                        if r.n_st.is_heating() {
                            "heating"
                        } else {
                            "cooling"
                        }
                        .into(),
                    );
                    row.push(String::new());
                }
                Err(e) => {
                    row.extend(spec.outputs.iter().map(|_| "error".to_string()));
                    row.push("error".into());
                    row.push(e.code().into());
                }
            }
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Whitespace-separated matrix of one output for gnuplot's
    /// `plot ... matrix nonuniform`; heating and failed cells are `NaN`
    /// so gnuplot leaves them blank. Needs two axes.
    pub fn gnuplot_matrix(&self, output: Output) -> Result<String> {
        let a2 = self.spec.axis2.as_ref().ok_or(Error::InvalidParameter {
            name: "axis",
            reason: "matrix output needs two axes".into(),
        })?;
        let ys = a2.values();
        let mut out = String::new();
        let _ = write!(out, "{}", ys.len());
        for y in &ys {
            let _ = write!(out, " {}", fmt(*y));
        }
        out.push('\n');
        for row in self.cells.chunks(ys.len()) {
            let _ = write!(out, "{}", fmt(row[0].x));
            for c in row {
                let v = c.result.as_ref().ok().and_then(|r| output.value(r));
                let _ = write!(out, " {}", v.map_or_else(|| "NaN".to_string(), fmt));
            }
            out.push('\n');
        }
        Ok(out)
    }

    /// Local minima of `n_st` along a one-dimensional scan.
    pub fn n_st_minima(&self) -> Vec<f64> {
        let v: Vec<Option<f64>> = self
            .cells
            .iter()
            .map(|c| c.result.as_ref().ok().and_then(|r| r.n_st.value()))
            .collect();
        (1..v.len().saturating_sub(1))
            .filter(|&i| matches!((v[i - 1], v[i], v[i + 1]), (Some(a), Some(b), Some(c)) if b < a && b <= c))
            .map(|i| self.cells[i].x)
            .collect()
    }
}

/// Companion `delta_c, delta_opt` table; the divergence at `delta_c = -nu`
/// is written as `divergent`.
pub fn delta_opt_curve(base: &ParamFile, delta_c: &[f64]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# params_hash = {}", params_hash(base));
    out.push_str("delta_c,delta_opt\n");
    for &dc in delta_c {
        let value = delta_opt(dc, &base.params).map_or_else(|_| "divergent".to_string(), fmt);
        let _ = writeln!(out, "{},{}", fmt(dc), value);
    }
    out
}

/// Steady state for display: the number, or `heating`.
pub fn n_st_label(n: SteadyState) -> String {
    n.value().map_or_else(|| "heating".to_string(), fmt)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ParamFile {
        ParamFile {
            params: SystemParams::default().with_g_tilde(7.0),
            ..Default::default()
        }
    }

    #[test]
    fn axis_parsing_and_validation() {
        let a = Axis::parse("delta_c:-2:1.5:8").unwrap();
        assert_eq!(a.values().len(), 8);
        assert_eq!(*a.values().last().unwrap(), 1.5);
        assert!(Axis::parse("nu:0:1:3").is_err());
        assert!(Axis::parse("delta:0:1:1").is_err());
        assert!(Axis::parse("delta:0:inf:3").is_err());
    }

    #[test]
    fn flat_region_is_constant() {
        // eta does not enter A+, A-, D
        let spec = ScanSpec {
            outputs: vec![Output::APlus, Output::AMinus, Output::D],
            ..ScanSpec::new(base(), Axis::new("eta", 0.05, 0.1, 2).unwrap())
        };
        let r = run_scan(&spec).unwrap();
        let (a, b) = (
            r.cells[0].result.as_ref().unwrap(),
            r.cells[1].result.as_ref().unwrap(),
        );
        assert!((a.a_plus - b.a_plus).abs() <= 1e-12 * a.a_plus);
        assert!((a.a_minus - b.a_minus).abs() <= 1e-12 * a.a_minus);
    }

    #[test]
    fn csv_has_no_nan_and_keeps_going() {
        let mut base = base();
        base.params.kappa = 0.0;
        base.params.gamma = 0.0;
        let mut spec = ScanSpec::new(base, Axis::new("delta_c", -2.0, 1.0, 7).unwrap());
        spec.along_delta_opt = true;
        let r = run_scan(&spec).unwrap();
        let csv = r.to_csv();
        let mut fields = csv
            .lines()
            .filter(|l| !l.starts_with('#'))
            .flat_map(|l| l.split(','));
        assert!(fields.all(|f| !f.eq_ignore_ascii_case("nan")));
        assert!(csv.contains("divergent-optimum"));
        assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 8);
        assert_eq!(parse_metadata(&csv).unwrap(), spec.base);
    }

    #[test]
    fn heating_is_a_sentinel() {
        let base = base();
        let mut spec = ScanSpec::new(base, Axis::new("delta", -30.0, 30.0, 13).unwrap());
        spec.axis2 = Some(Axis::new("delta_c", -3.0, 3.0, 5).unwrap());
        let r = run_scan(&spec).unwrap();
        let csv = r.to_csv();
        assert!(csv.contains(",heating,"));
        let m = r.gnuplot_matrix(Output::NSt).unwrap();
        assert_eq!(m.lines().count(), 14);
    }

    #[test]
    fn engines_agree_at_weak_drive() {
        let mut base = base();
        base.params.omega = 0.01 * base.params.gamma;
        base.params.kappa = 0.5;
        let mut spec = ScanSpec::new(base, Axis::new("delta", 5.0, 25.0, 5).unwrap());
        spec.axis2 = Some(Axis::new("delta_c", -3.0, 2.0, 5).unwrap());
        spec.outputs = vec![Output::APlus, Output::AMinus];
        let a = run_scan(&spec).unwrap();
        spec.engine = Engine::Liouvillian;
        let l = run_scan(&spec).unwrap();
        for (x, y) in a.cells.iter().zip(&l.cells) {
            let (x, y) = (x.result.as_ref().unwrap(), y.result.as_ref().unwrap());
            assert!((x.a_minus - y.a_minus).abs() < 0.01 * x.a_minus);
            assert!((x.a_plus - y.a_plus).abs() < 0.01 * x.a_plus);
        }
    }

    #[test]
    fn output_is_deterministic() {
        let spec = ScanSpec::new(base(), Axis::new("delta_c", -2.0, 1.5, 36).unwrap());
        assert_eq!(
            run_scan(&spec).unwrap().to_csv(),
            run_scan(&spec).unwrap().to_csv()
        );
    }

    #[test]
    fn delta_opt_companion() {
        let curve = delta_opt_curve(&base(), &[-1.0, 0.0]);
        assert!(curve.contains("divergent"));
        assert!(curve.lines().last().unwrap().starts_with("0e0,"));
    }
}
