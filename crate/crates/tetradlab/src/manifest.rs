//! Manifest loading: line-oriented `key = value` entries inside `[section]`
//! blocks declare a chart plus either a metric or a coframe (or a builtin
//! reference), a connection selector, the suites to run and the sampling
//! parameters.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

use crate::connection::{t3, ConnectionFlavor, Tensor3};
use crate::geometry::{mat, sample_points, Chart, Signature};
use crate::manifold::{builtin, Manifold, ManifoldError, BUILTIN_NAMES};
use crate::suite::SUITE_NAMES;
use crate::symexpr;

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("cannot read manifest {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("section [{section}], key `{key}`: {message}")]
    Validation {
        section: String,
        key: String,
        message: String,
    },
    #[error(transparent)]
    Manifold(#[from] ManifoldError),
}

#[derive(Debug, Clone)]
pub struct Sampling {
    pub points: usize,
    pub seed: Option<u64>,
    pub tol_scale: f64,
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling {
            points: 32,
            seed: None,
            tol_scale: 1.0,
        }
    }
}

/// A fully validated manifest, ready to build a [`Manifold`].
#[derive(Debug, Clone)]
pub struct Manifest {
    pub name: String,
    pub builtin: Option<String>,
    pub param: Option<f64>,
    pub chart: Option<ChartSpec>,
    pub coframe_entries: BTreeMap<(usize, usize), String>,
    pub metric_entries: BTreeMap<(usize, usize), String>,
    pub flavor: ConnectionFlavor,
    pub gamma_entries: BTreeMap<(usize, usize, usize), String>,
    pub suites: Vec<String>,
    pub sampling: Sampling,
}

#[derive(Debug, Clone)]
pub struct ChartSpec {
    pub coords: Vec<String>,
    pub domain: Vec<(f64, f64)>,
    pub signature: Signature,
}

fn err(section: &str, key: &str, message: impl Into<String>) -> ManifestError {
    ManifestError::Validation {
        section: section.into(),
        key: key.into(),
        message: message.into(),
    }
}

pub fn load_manifest(path: &Path) -> Result<Manifest, ManifestError> {
    let text = std::fs::read_to_string(path).map_err(|source| ManifestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_manifest(&text)
}

/// Default manifest for a builtin reference like `builtin:s2`.
pub fn builtin_manifest(spec: &str) -> Result<Manifest, ManifestError> {
    let name = spec.strip_prefix("builtin:").unwrap_or(spec);
    if !BUILTIN_NAMES.contains(&name) {
        return Err(err(
            "manifold",
            "manifold",
            format!(
                "unknown builtin `{}`; available: {}",
                name,
                BUILTIN_NAMES.join(", ")
            ),
        ));
    }
    Ok(Manifest {
        name: name.to_string(),
        builtin: Some(name.to_string()),
        param: None,
        chart: None,
        coframe_entries: BTreeMap::new(),
        metric_entries: BTreeMap::new(),
        flavor: ConnectionFlavor::LeviCivita,
        gamma_entries: BTreeMap::new(),
        suites: default_suites_for(name),
        sampling: Sampling::default(),
    })
}

/// The suites a builtin runs when the manifest does not name any.
pub fn default_suites_for(name: &str) -> Vec<String> {
    let mut suites: Vec<&str> = vec![
        "geometry",
        "connection",
        "wave",
        "clifford",
        "dirac",
        "operators",
        "fieldeq",
        "evans-demo",
        "maxwell",
    ];
    match name {
        "s2" => {
            suites.insert(2, "counterexample");
            suites.insert(3, "columbus");
        }
        "minkowski" | "schwarzschild" | "flrw-dust" => {
            suites.push("lagrangian");
        }
        _ => {}
    }
    suites.into_iter().map(|s| s.to_string()).collect()
}

pub fn parse_manifest(text: &str) -> Result<Manifest, ManifestError> {
    let mut section = String::new();
    let mut entries: Vec<(String, String, String, usize)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or(ManifestError::Parse {
                line: lineno + 1,
                message: "unterminated section header".into(),
            })?;
            section = name.trim().to_string();
            continue;
        }
        let (key, value) = line.split_once('=').ok_or(ManifestError::Parse {
            line: lineno + 1,
            message: "expected `key = value`".into(),
        })?;
        let mut value = value.trim().to_string();
        if value.starts_with('"') && value.ends_with('"') && value.len() >= 2 {
            value = value[1..value.len() - 1].to_string();
        }
        entries.push((section.clone(), key.trim().to_string(), value, lineno + 1));
    }

    let mut m = Manifest {
        name: String::new(),
        builtin: None,
        param: None,
        chart: None,
        coframe_entries: BTreeMap::new(),
        metric_entries: BTreeMap::new(),
        flavor: ConnectionFlavor::LeviCivita,
        gamma_entries: BTreeMap::new(),
        suites: Vec::new(),
        sampling: Sampling::default(),
    };
    let mut chart_coords: Option<Vec<String>> = None;
    let mut chart_domain: BTreeMap<String, (f64, f64)> = BTreeMap::new();
    let mut chart_sig: Option<Signature> = None;

    for (section, key, value, line) in &entries {
        let at = |msg: String| ManifestError::Parse {
            line: *line,
            message: msg,
        };
        match (section.as_str(), key.as_str()) {
            ("manifold", "name") => m.name = value.clone(),
            ("manifold", "manifold") => {
                let name = value
                    .strip_prefix("builtin:")
                    .ok_or_else(|| at(format!("expected `builtin:<name>`, got `{}`", value)))?;
                if !BUILTIN_NAMES.contains(&name) {
                    return Err(at(format!(
                        "unknown builtin `{}`; available: {}",
                        name,
                        BUILTIN_NAMES.join(", ")
                    )));
                }
                m.builtin = Some(name.to_string());
                if m.name.is_empty() {
                    m.name = name.to_string();
                }
            }
            ("manifold", k) if k.starts_with("param.") || k == "param" => {
                m.param = Some(
                    value
                        .parse::<f64>()
                        .map_err(|_| at(format!("invalid number `{}`", value)))?,
                );
            }
            ("chart", "coords") => {
                chart_coords = Some(
                    value
                        .split(',')
                        .map(|s| s.trim().to_string())
                        .filter(|s| !s.is_empty())
                        .collect(),
                );
            }
            ("chart", "dim") => { /* implied by coords; accepted for readability */ }
            ("chart", "signature") => {
                let parts: Vec<&str> = value.split(',').map(|s| s.trim()).collect();
                if parts.len() != 2 {
                    return Err(at("signature must be `p,q`".into()));
                }
                let p = parts[0]
                    .parse::<usize>()
                    .map_err(|_| at(format!("invalid signature part `{}`", parts[0])))?;
                let q = parts[1]
                    .parse::<usize>()
                    .map_err(|_| at(format!("invalid signature part `{}`", parts[1])))?;
                chart_sig = Some(Signature::new(p, q));
            }
            ("chart", k) if k.starts_with("domain.") => {
                let coord = k.trim_start_matches("domain.").to_string();
                let parts: Vec<&str> = value.split(',').map(|s| s.trim()).collect();
                if parts.len() != 2 {
                    return Err(at("domain must be `lo,hi`".into()));
                }
                let lo = parts[0]
                    .parse::<f64>()
                    .map_err(|_| at(format!("invalid bound `{}`", parts[0])))?;
                let hi = parts[1]
                    .parse::<f64>()
                    .map_err(|_| at(format!("invalid bound `{}`", parts[1])))?;
                chart_domain.insert(coord, (lo, hi));
            }
            ("coframe", k) if k.starts_with("q.") => {
                let idx = parse_two_indices(k, "q").map_err(at)?;
                m.coframe_entries.insert(idx, value.clone());
            }
            ("metric", k) if k.starts_with("g.") => {
                let idx = parse_two_indices(k, "g").map_err(at)?;
                m.metric_entries.insert(idx, value.clone());
            }
            ("connection", "connection") | ("connection", "flavor") => {
                m.flavor = match value.as_str() {
                    "levicivita" => ConnectionFlavor::LeviCivita,
                    "columbus" => ConnectionFlavor::Teleparallel,
                    "custom" => ConnectionFlavor::Custom,
                    other => {
                        return Err(at(format!(
                            "unknown connection `{}`; use levicivita | columbus | custom",
                            other
                        )))
                    }
                };
            }
            ("connection", k) if k.starts_with("gamma.") => {
                let idx = parse_three_indices(k).map_err(at)?;
                m.gamma_entries.insert(idx, value.clone());
            }
            ("suites", "run") | ("suites", "suites") => {
                m.suites = value
                    .split(',')
                    .map(|s| s.trim().trim_start_matches("suite.").to_string())
                    .filter(|s| !s.is_empty())
                    .collect();
            }
            ("sampling", "points") | ("sampling", "count") => {
                m.sampling.points = value
                    .parse::<usize>()
                    .map_err(|_| at(format!("invalid count `{}`", value)))?;
            }
            ("sampling", "seed") => {
                m.sampling.seed = Some(
                    value
                        .parse::<u64>()
                        .map_err(|_| at(format!("invalid seed `{}`", value)))?,
                );
            }
            ("sampling", "tolscale") | ("sampling", "tol-scale") => {
                m.sampling.tol_scale = value
                    .parse::<f64>()
                    .map_err(|_| at(format!("invalid scale `{}`", value)))?;
            }
            (s, k) => {
                return Err(at(format!("unknown key `{}` in section [{}]", k, s)));
            }
        }
    }

    // assemble the chart spec when declared
    if let Some(coords) = chart_coords {
        let sig = chart_sig.ok_or_else(|| err("chart", "signature", "missing signature"))?;
        let mut domain = Vec::new();
        for c in &coords {
            let d = chart_domain
                .get(c)
                .ok_or_else(|| err("chart", &format!("domain.{}", c), "missing domain interval"))?;
            domain.push(*d);
        }
        m.chart = Some(ChartSpec {
            coords,
            domain,
            signature: sig,
        });
    }

    validate(&mut m)?;
    Ok(m)
}

fn parse_two_indices(key: &str, prefix: &str) -> Result<(usize, usize), String> {
    let rest = key.trim_start_matches(prefix).trim_start_matches('.');
    let parts: Vec<&str> = rest.split('.').collect();
    if parts.len() != 2 {
        return Err(format!("expected `{}.<i>.<j>`, got `{}`", prefix, key));
    }
    let i = parts[0]
        .parse::<usize>()
        .map_err(|_| format!("invalid index `{}`", parts[0]))?;
    let j = parts[1]
        .parse::<usize>()
        .map_err(|_| format!("invalid index `{}`", parts[1]))?;
    Ok((i, j))
}

fn parse_three_indices(key: &str) -> Result<(usize, usize, usize), String> {
    let rest = key.trim_start_matches("gamma").trim_start_matches('.');
    let parts: Vec<&str> = rest.split('.').collect();
    if parts.len() != 3 {
        return Err(format!("expected `gamma.<r>.<m>.<n>`, got `{}`", key));
    }
    let r = parts[0]
        .parse::<usize>()
        .map_err(|_| format!("invalid index `{}`", parts[0]))?;
    let mm = parts[1]
        .parse::<usize>()
        .map_err(|_| format!("invalid index `{}`", parts[1]))?;
    let n = parts[2]
        .parse::<usize>()
        .map_err(|_| format!("invalid index `{}`", parts[2]))?;
    Ok((r, mm, n))
}

fn validate(m: &mut Manifest) -> Result<(), ManifestError> {
    if m.builtin.is_some() {
        if m.chart.is_some() || !m.coframe_entries.is_empty() || !m.metric_entries.is_empty() {
            return Err(err(
                "manifold",
                "manifold",
                "a builtin reference excludes chart/metric/coframe blocks",
            ));
        }
    } else {
        if m.chart.is_none() {
            return Err(err("chart", "coords", "missing chart declaration"));
        }
        let has_coframe = !m.coframe_entries.is_empty();
        let has_metric = !m.metric_entries.is_empty();
        if has_coframe == has_metric {
            return Err(err(
                "manifold",
                "metric/coframe",
                "exactly one of the [metric] and [coframe] blocks must be present",
            ));
        }
        if m.name.is_empty() {
            m.name = "custom".to_string();
        }
    }
    if m.flavor == ConnectionFlavor::Custom && m.gamma_entries.is_empty() {
        return Err(err(
            "connection",
            "gamma",
            "custom connection requires gamma.<r>.<m>.<n> entries",
        ));
    }
    if m.suites.is_empty() {
        m.suites = default_suites_for(m.builtin.as_deref().unwrap_or(""));
    }
    for s in &m.suites {
        if !SUITE_NAMES.contains(&s.as_str()) {
            return Err(err(
                "suites",
                "run",
                format!(
                    "unknown suite `{}`; valid suites: {}",
                    s,
                    SUITE_NAMES.join(", ")
                ),
            ));
        }
    }
    Ok(())
}

impl Manifest {
    /// Build the manifold this manifest declares.
    pub fn build(&self) -> Result<Manifold, ManifestError> {
        if let Some(name) = &self.builtin {
            let mut m = builtin(name, self.param)?;
            if self.flavor != ConnectionFlavor::LeviCivita {
                let pts = sample_points(&m.chart, 8, 0);
                let gamma = self.custom_gamma(&m.chart)?;
                m = m.with_connection(self.flavor, gamma, &pts)?;
            }
            return Ok(m);
        }
        let spec = self.chart.as_ref().expect("validated");
        let chart = Arc::new(
            Chart::new(spec.coords.clone(), spec.domain.clone(), spec.signature)
                .map_err(ManifoldError::Geometry)?,
        );
        let pts = sample_points(&chart, 8, self.sampling.seed.unwrap_or(0));
        let dim = chart.dim;
        let gamma = self.custom_gamma(&chart)?;
        if !self.coframe_entries.is_empty() {
            let q = self.field_matrix(&chart, &self.coframe_entries, "coframe")?;
            Ok(Manifold::from_coframe(
                &self.name,
                chart,
                q,
                self.flavor,
                gamma,
                &pts,
            )?)
        } else {
            let mut g = self.field_matrix(&chart, &self.metric_entries, "metric")?;
            // mirror g_{ij} to g_{ji} when only one triangle is given
            for i in 0..dim {
                for j in 0..dim {
                    if g[i][j].is_zero() && !g[j][i].is_zero() {
                        g[i][j] = g[j][i].clone();
                    }
                }
            }
            Ok(Manifold::from_metric(
                &self.name,
                chart,
                g,
                self.flavor,
                gamma,
                &pts,
            )?)
        }
    }

    fn field_matrix(
        &self,
        chart: &Arc<Chart>,
        entries: &BTreeMap<(usize, usize), String>,
        section: &str,
    ) -> Result<crate::geometry::Mat, ManifestError> {
        let dim = chart.dim;
        let mut out = mat(dim, |_, _| chart.zero());
        for (&(i, j), text) in entries {
            if i >= dim || j >= dim {
                return Err(err(
                    section,
                    &format!(
                        "{}.{}.{}",
                        if section == "metric" { "g" } else { "q" },
                        i,
                        j
                    ),
                    format!("index out of range for dimension {}", dim),
                ));
            }
            out[i][j] = symexpr::parse(text, chart).map_err(|e| {
                err(
                    section,
                    &format!(
                        "{}.{}.{}",
                        if section == "metric" { "g" } else { "q" },
                        i,
                        j
                    ),
                    e.to_string(),
                )
            })?;
        }
        Ok(out)
    }

    fn custom_gamma(&self, chart: &Arc<Chart>) -> Result<Option<Tensor3>, ManifestError> {
        if self.flavor != ConnectionFlavor::Custom {
            return Ok(None);
        }
        let dim = chart.dim;
        let mut gamma = t3(dim, |_, _, _| chart.zero());
        for (&(r, mm, n), text) in &self.gamma_entries {
            if r >= dim || mm >= dim || n >= dim {
                return Err(err(
                    "connection",
                    &format!("gamma.{}.{}.{}", r, mm, n),
                    format!("index out of range for dimension {}", dim),
                ));
            }
            gamma[r][mm][n] = symexpr::parse(text, chart).map_err(|e| {
                err(
                    "connection",
                    &format!("gamma.{}.{}.{}", r, mm, n),
                    e.to_string(),
                )
            })?;
        }
        Ok(Some(gamma))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_reference_loads_s2() {
        let text = "[manifold]\nmanifold = builtin:s2\n";
        let m = parse_manifest(text).unwrap();
        assert_eq!(m.builtin.as_deref(), Some("s2"));
        let manifold = m.build().unwrap();
        assert_eq!(manifold.name, "s2");
        assert_eq!(manifold.dim(), 2);
    }

    #[test]
    fn metric_and_coframe_blocks_are_exclusive() {
        let text = r#"
[chart]
coords = x1, x2
signature = 2,0
domain.x1 = 0.1, 3.0
domain.x2 = 0.1, 6.0
[coframe]
q.0.0 = "1"
q.1.1 = "sin(x1)"
[metric]
g.0.0 = "1"
g.1.1 = "sin(x1)^2"
"#;
        match parse_manifest(text) {
            Err(ManifestError::Validation { message, .. }) => {
                assert!(message.contains("exactly one"));
            }
            other => panic!("expected validation error, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn unknown_suite_is_rejected_with_the_catalog() {
        let text = "[manifold]\nmanifold = builtin:s2\n[suites]\nrun = nonsense\n";
        match parse_manifest(text) {
            Err(ManifestError::Validation { message, .. }) => {
                assert!(message.contains("nonsense"));
                assert!(message.contains("geometry"));
            }
            other => panic!("expected validation error, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn custom_coframe_manifest_builds() {
        let text = r#"
[manifold]
name = round-sphere
[chart]
coords = x1, x2
signature = 2,0
domain.x1 = 0.1, 3.04
domain.x2 = 0.1, 6.18
[coframe]
q.0.0 = "1"
q.1.1 = "sin(x1)"
[suites]
run = geometry, connection
[sampling]
points = 8
seed = 3
"#;
        let m = parse_manifest(text).unwrap();
        let manifold = m.build().unwrap();
        assert_eq!(manifold.name, "round-sphere");
    }
}
