use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{parse_damping, parse_kernel, parse_modulus, parse_xi};
use crate::scenario::initial::parse_initial;
use crate::scenario::presets::preset;
use crate::spectral::{default_quad_order, min_quad_order};

/// A complete run description. Every section has defaults, so an empty
/// file is a valid scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Scenario {
    pub name: String,
    pub grid: GridSection,
    pub time: TimeSection,
    pub physics: PhysicsSection,
    pub initial: InitialSection,
    pub diagnostics: DiagnosticsSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    /// 1 for a beam, 2 for a square plate.
    pub spatial_dim: usize,
    /// Modes per axis.
    pub n: usize,
    /// Side length.
    pub length: f64,
    /// Gauss points per axis; `4n + 16` when absent.
    pub quad_order: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeSection {
    pub dt: f64,
    pub t_end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicsSection {
    pub rho: f64,
    pub k: f64,
    pub sigma: f64,
    pub kernel: String,
    pub damping: String,
    pub xi: String,
    pub modulus: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialSection {
    /// Sum of `mode(j,c)` terms (`mode(i,j,c)` on the plate), a
    /// `table(x:u,...)` profile, or `none`.
    pub displacement: String,
    pub velocity: String,
    /// Halve the data until it lies inside the potential well.
    pub scale_into_well: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsSection {
    /// Steps between timeseries rows.
    pub stride: usize,
    /// `a` for the well constants; the window midpoint when absent.
    pub well_a: Option<f64>,
    /// `a` for the logarithmic Sobolev gap; the well `a` when absent.
    pub sobolev_a: Option<f64>,
    pub lyapunov_eps: f64,
    /// Start of the memory tail; `T/4` when absent.
    pub t1: Option<f64>,
    pub delta: f64,
    pub eps0: f64,
    pub eps1: f64,
    /// Inner constant of the nonlinear envelopes.
    pub envelope_c1: f64,
    /// Fraction of `T` where the decay-fit window starts.
    pub fit_from: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            name: "scenario".into(),
            grid: GridSection::default(),
            time: TimeSection::default(),
            physics: PhysicsSection::default(),
            initial: InitialSection::default(),
            diagnostics: DiagnosticsSection::default(),
            output: OutputSection::default(),
        }
    }
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            spatial_dim: 1,
            n: 8,
            length: 1.0,
            quad_order: None,
        }
    }
}

impl Default for TimeSection {
    fn default() -> Self {
        Self { dt: 1e-3, t_end: 5.0 }
    }
}

impl Default for PhysicsSection {
    fn default() -> Self {
        Self {
            rho: 0.0,
            k: 0.0,
            sigma: crate::dynamics::DEFAULT_SIGMA,
            kernel: "none".into(),
            damping: "none".into(),
            xi: "auto".into(),
            modulus: "auto".into(),
        }
    }
}

impl Default for InitialSection {
    fn default() -> Self {
        Self {
            displacement: "mode(1,0.1)+mode(2,0.05)".into(),
            velocity: "none".into(),
            scale_into_well: false,
        }
    }
}

impl Default for DiagnosticsSection {
    fn default() -> Self {
        Self {
            stride: 10,
            well_a: None,
            sobolev_a: None,
            lyapunov_eps: crate::diagnostics::DEFAULT_LYAPUNOV_EPS,
            t1: None,
            delta: crate::diagnostics::DEFAULT_DELTA,
            eps0: crate::kernels::DEFAULT_EPS0,
            eps1: 1.0,
            envelope_c1: 1.0,
            fit_from: 0.5,
        }
    }
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: "out".into() }
    }
}

impl Scenario {
    /// Number of uniform steps covering `[0, T]`.
    pub fn steps(&self) -> usize {
        (self.time.t_end / self.time.dt).round() as usize
    }

    pub fn quad_order(&self) -> usize {
        self.grid.quad_order.unwrap_or_else(|| default_quad_order(self.grid.n))
    }

    pub fn t1(&self) -> f64 {
        self.diagnostics.t1.unwrap_or(0.25 * self.time.t_end)
    }

    /// Same scenario with every defaulted value written out.
    pub fn resolved(&self) -> Self {
        let mut s = self.clone();
        s.grid.quad_order = Some(self.quad_order());
        s.diagnostics.t1 = Some(self.t1());
        s
    }

    /// Checks every field and lists all problems at once.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        let mut check = |ok: bool, msg: String| {
            if !ok {
                problems.push(msg);
            }
        };
        let g = &self.grid;
        check(
            matches!(g.spatial_dim, 1 | 2),
            format!("grid.spatial_dim must be 1 or 2, got {}", g.spatial_dim),
        );
        check(g.n >= 1, "grid.n must be at least 1".into());
        check(
            g.length > 0.0 && g.length.is_finite(),
            format!("grid.length must be positive, got {}", g.length),
        );
        if let Some(q) = g.quad_order {
            check(
                q >= min_quad_order(g.n),
                format!("grid.quad_order = {q} is below the minimum {}", min_quad_order(g.n)),
            );
        }
        let t = &self.time;
        check(
            t.dt > 0.0 && t.dt.is_finite(),
            format!("time.dt must be positive, got {}", t.dt),
        );
        check(
            t.t_end >= 0.0 && t.t_end.is_finite(),
            format!("time.t_end must be ≥ 0, got {}", t.t_end),
        );
        let p = &self.physics;
        check(
            p.rho >= 0.0 && p.rho.is_finite(),
            format!("physics.rho must be ≥ 0, got {}", p.rho),
        );
        check(
            p.k >= 0.0 && p.k.is_finite(),
            format!("physics.k must be ≥ 0, got {}", p.k),
        );
        check(
            p.sigma >= 0.0 && p.sigma.is_finite(),
            format!("physics.sigma must be ≥ 0, got {}", p.sigma),
        );
        match parse_kernel(&p.kernel) {
            Ok(kernel) => {
                if let Err(e) = parse_xi(&p.xi, &kernel) {
                    check(false, format!("physics.xi: {e}"));
                }
                if let Err(e) = parse_modulus(&p.modulus, &kernel) {
                    check(false, format!("physics.modulus: {e}"));
                }
            }
            Err(e) => check(false, format!("physics.kernel: {e}")),
        }
        if let Err(e) = parse_damping(&p.damping) {
            check(false, format!("physics.damping: {e}"));
        }
        if matches!(g.spatial_dim, 1 | 2) && g.n >= 1 {
            for (key, spec) in [
                ("initial.displacement", &self.initial.displacement),
                ("initial.velocity", &self.initial.velocity),
            ] {
                if let Err(e) = parse_initial(spec, g.spatial_dim, g.n) {
                    check(false, format!("{key}: {e}"));
                }
            }
        }
        let d = &self.diagnostics;
        check(d.stride >= 1, "diagnostics.stride must be at least 1".into());
        for (key, a) in [("diagnostics.well_a", d.well_a), ("diagnostics.sobolev_a", d.sobolev_a)] {
            if let Some(a) = a {
                check(a > 0.0 && a.is_finite(), format!("{key} must be positive, got {a}"));
            }
        }
        check(
            d.lyapunov_eps > 0.0,
            format!("diagnostics.lyapunov_eps must be positive, got {}", d.lyapunov_eps),
        );
        if let Some(t1) = d.t1 {
            check(
                t1 >= 0.0 && t1 <= t.t_end,
                format!("diagnostics.t1 must lie in [0, T], got {t1}"),
            );
        }
        check(
            d.delta > 0.0 && d.delta < 1.0,
            format!("diagnostics.delta must lie in (0, 1), got {}", d.delta),
        );
        check(
            d.eps0 > 0.0 && d.eps0 < 1.0,
            format!("diagnostics.eps0 must lie in (0, 1), got {}", d.eps0),
        );
        check(
            d.eps1 > 0.0,
            format!("diagnostics.eps1 must be positive, got {}", d.eps1),
        );
        check(
            d.envelope_c1 > 0.0,
            format!("diagnostics.envelope_c1 must be positive, got {}", d.envelope_c1),
        );
        check(
            d.fit_from >= 0.0 && d.fit_from < 1.0,
            format!("diagnostics.fit_from must lie in [0, 1), got {}", d.fit_from),
        );
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::config(None, problems.join("; ")))
        }
    }

    /// TOML text of the resolved scenario.
    pub fn effective_config(&self) -> Result<String> {
        toml::to_string(&self.resolved()).map_err(|e| Error::config(None, e.to_string()))
    }

    /// Sets one field from a sweep axis. `key` is `section.field` or a bare
    /// field name that is unique across sections; `value` is read as a TOML
    /// literal when possible and as a string otherwise.
    pub fn with_value(&self, key: &str, value: &str) -> Result<Self> {
        let mut table = toml::Table::try_from(self).map_err(|e| Error::config(Some(key), e.to_string()))?;
        let (section, field) = resolve_key(key)?;
        let literal = format!("v = {value}")
            .parse::<toml::Table>()
            .ok()
            .and_then(|t| t.get("v").cloned())
            .unwrap_or_else(|| toml::Value::String(value.to_owned()));
        let slot = match section {
            Some(s) => table
                .entry(s)
                .or_insert_with(|| toml::Value::Table(toml::Table::new()))
                .as_table_mut()
                .ok_or_else(|| Error::config(Some(key), "not a section"))?,
            None => &mut table,
        };
        let literal = match (slot.get(field), literal) {
            (Some(toml::Value::Float(_)), toml::Value::Integer(i)) => toml::Value::Float(i as f64),
            (Some(toml::Value::String(_)), v) if !v.is_str() => toml::Value::String(value.to_owned()),
            (_, v) => v,
        };
        slot.insert(field.to_owned(), literal);
        from_table(table)
    }
}

const SECTIONS: [(&str, &[&str]); 6] = [
    ("grid", &["spatial_dim", "n", "length", "quad_order"]),
    ("time", &["dt", "t_end"]),
    ("physics", &["rho", "k", "sigma", "kernel", "damping", "xi", "modulus"]),
    ("initial", &["displacement", "velocity", "scale_into_well"]),
    (
        "diagnostics",
        &[
            "stride",
            "well_a",
            "sobolev_a",
            "lyapunov_eps",
            "t1",
            "delta",
            "eps0",
            "eps1",
            "envelope_c1",
            "fit_from",
        ],
    ),
    ("output", &["dir"]),
];

fn resolve_key(key: &str) -> Result<(Option<&'static str>, &str)> {
    if key == "name" {
        return Ok((None, "name"));
    }
    if let Some((section, field)) = key.split_once('.') {
        return SECTIONS
            .iter()
            .find(|(s, fields)| *s == section && fields.contains(&field))
            .map(|(s, _)| (Some(*s), field))
            .ok_or_else(|| Error::config(Some(key), "unknown key"));
    }
    let hits: Vec<&str> = SECTIONS
        .iter()
        .filter(|(_, fields)| fields.contains(&key))
        .map(|(s, _)| *s)
        .collect();
    match hits.as_slice() {
        [s] => Ok((Some(s), key)),
        [] => Err(Error::config(Some(key), "unknown key")),
        _ => Err(Error::config(Some(key), "ambiguous key; use section.field")),
    }
}

fn from_table(table: toml::Table) -> Result<Scenario> {
    let s: Scenario = table
        .try_into()
        .map_err(|e: toml::de::Error| Error::config(None, e.to_string()))?;
    s.validate()?;
    Ok(s)
}

/// Parses scenario text. A top-level `preset = "name"` starts from that
/// preset; every other key overrides it.
pub fn parse_scenario_str(text: &str) -> Result<Scenario> {
    let mut table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::config(None, e.to_string()))?;
    if let Some(name) = table.remove("preset") {
        let name = name
            .as_str()
            .ok_or_else(|| Error::config(Some("preset"), "must be a string"))?
            .to_owned();
        let base = preset(&name).ok_or_else(|| Error::config(Some("preset"), format!("no preset named `{name}`")))?;
        let mut merged = toml::Table::try_from(&base).map_err(|e| Error::config(None, e.to_string()))?;
        for (key, value) in table {
            match (merged.get_mut(&key), value) {
                (Some(toml::Value::Table(into)), toml::Value::Table(from)) => into.extend(from),
                (_, value) => {
                    merged.insert(key, value);
                }
            }
        }
        table = merged;
    }
    from_table(table)
}

pub fn parse_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)?;
    parse_scenario_str(&text)
}
