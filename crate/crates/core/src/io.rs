//! Text formats: spaces as CSV, mesh edges as `i,j,length` lines, and
//! `key=value` configuration files for models and budgets.
//!
//! Every parse error carries the 1-based line number it refers to.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::bochner::GeometryBudget;
use crate::error::{Error, Result};
use crate::mms::{Edge, FiniteMMS, FourierSeries, ModelKind, ModelManifold, Potential};

fn parse_err<T>(line: usize, message: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line, message: message.into() })
}

fn parse_f64(line: usize, field: &str) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .or_else(|_| parse_err(line, format!("`{}` is not a number", field.trim())))
}

fn parse_usize(line: usize, field: &str) -> Result<usize> {
    field
        .trim()
        .parse::<usize>()
        .or_else(|_| parse_err(line, format!("`{}` is not a nonnegative integer", field.trim())))
}

/// Parses a space: a `# mms n=<n>` header, `n` rows of `n` distances, then a
/// row of `n` weights. Blank lines are ignored.
pub fn parse_mms_csv(text: &str) -> Result<FiniteMMS> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines.next().map_or_else(|| parse_err(1, "empty input"), Ok)?;
    let n = header
        .strip_prefix('#')
        .map(str::trim)
        .and_then(|h| h.strip_prefix("mms"))
        .map(str::trim)
        .and_then(|h| h.strip_prefix("n="))
        .map_or_else(|| parse_err(hline, "expected header `# mms n=<n>`"), |v| parse_usize(hline, v))?;
    let mut rows = Vec::with_capacity(n + 1);
    let mut last = hline;
    for (ln, line) in lines {
        last = ln;
        let row = line.split(',').map(|f| parse_f64(ln, f)).collect::<Result<Vec<_>>>()?;
        if row.len() != n {
            return parse_err(ln, format!("expected {n} entries, found {}", row.len()));
        }
        if rows.len() == n + 1 {
            return parse_err(ln, format!("unexpected extra row after {n} distance rows and the weight row"));
        }
        rows.push(row);
    }
    if rows.len() != n + 1 {
        return parse_err(last, format!("expected {n} distance rows and a weight row, found {} rows", rows.len()));
    }
    let weights = rows.pop().expect("n + 1 rows");
    FiniteMMS::from_rows(&rows, weights)
}

/// Serializes a space in the format read by [`parse_mms_csv`].
pub fn write_mms_csv(space: &FiniteMMS) -> String {
    let n = space.n();
    let mut out = format!("# mms n={n}\n");
    let join = |xs: &[f64]| xs.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",");
    for i in 0..n {
        let _ = writeln!(out, "{}", join(space.dist_row(i)));
    }
    let _ = writeln!(out, "{}", join(space.weight()));
    out
}

/// Parses mesh edges, one `i,j,length` per line; `#` starts a comment line.
pub fn parse_edges(text: &str) -> Result<Vec<Edge>> {
    let mut edges = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let ln = idx + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return parse_err(ln, "expected `i,j,length`");
        }
        edges.push(Edge {
            i: parse_usize(ln, fields[0])?,
            j: parse_usize(ln, fields[1])?,
            length: parse_f64(ln, fields[2])?,
        });
    }
    Ok(edges)
}

/// Serializes mesh edges in the format read by [`parse_edges`].
pub fn write_edges(edges: &[Edge]) -> String {
    edges.iter().map(|e| format!("{},{},{:?}\n", e.i, e.j, e.length)).collect()
}

/// Reads a space and, optionally, its edge list from disk.
pub fn read_space(path: &Path, edges: Option<&Path>) -> Result<FiniteMMS> {
    let space = parse_mms_csv(&std::fs::read_to_string(path)?)?;
    match edges {
        Some(p) => space.with_adjacency(parse_edges(&std::fs::read_to_string(p)?)?),
        None => Ok(space),
    }
}

/// A parsed `key=value` file. Keys are unique; `#` starts a comment.
#[derive(Clone, Debug, Default)]
pub struct KeyValues {
    entries: BTreeMap<String, (usize, String)>,
    last_line: usize,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        let mut last_line = 0;
        for (idx, raw) in text.lines().enumerate() {
            let ln = idx + 1;
            last_line = ln;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return parse_err(ln, format!("expected `key=value`, found `{line}`"));
            };
            let (k, v) = (k.trim(), v.trim().trim_matches('"'));
            if k.is_empty() {
                return parse_err(ln, "empty key");
            }
            if let Some((prev, _)) = entries.insert(k.to_string(), (ln, v.to_string())) {
                return parse_err(ln, format!("duplicate key `{k}` (first set on line {prev})"));
            }
        }
        Ok(Self { entries, last_line: last_line.max(1) })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    pub fn line_of(&self, key: &str) -> usize {
        self.entries.get(key).map_or(self.last_line, |(l, _)| *l)
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>> {
        self.entries.get(key).map(|(l, v)| parse_f64(*l, v)).transpose()
    }

    pub fn require_f64(&self, key: &str) -> Result<f64> {
        self.f64(key)?.map_or_else(|| parse_err(self.last_line, format!("missing required key `{key}`")), Ok)
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>> {
        self.entries.get(key).map(|(l, v)| parse_usize(*l, v)).transpose()
    }

    /// All entries in key order as `(key, value)`.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, (_, v))| (k.as_str(), v.as_str()))
    }

    /// Rejects keys not accepted by `allowed`.
    fn check_keys(&self, allowed: impl Fn(&str) -> bool) -> Result<()> {
        for (k, (l, _)) in &self.entries {
            if !allowed(k) {
                return parse_err(*l, format!("unknown key `{k}`"));
            }
        }
        Ok(())
    }
}

/// A model and its discretization resolution, read from a config.
#[derive(Clone, Debug)]
pub struct ModelConfig {
    pub model: ModelManifold,
    pub resolution: Option<usize>,
}

/// Reads `kind`, shape keys, potential coefficients and `resolution`.
///
/// * circle: `radius`, `v.const`, `v.cos.<k>`, `v.sin.<k>`
/// * sphere: `radius`, `v.poly.<k>` (coefficient of `cos^k` of the polar angle)
/// * torus: `a`, `b`, `v.x.const`, `v.x.cos.<k>`, `v.x.sin.<k>` and the same for `y`
pub fn model_from_config(kv: &KeyValues) -> Result<ModelConfig> {
    let kind_line = kv.line_of("kind");
    let kind = kv.get("kind").map_or_else(|| parse_err(kind_line, "missing required key `kind`"), Ok)?;
    let resolution = kv.usize("resolution")?;
    let (kind, potential) = match kind {
        "circle" => {
            kv.check_keys(|k| matches!(k, "kind" | "radius" | "resolution") || k.starts_with("v."))?;
            let radius = kv.require_f64("radius")?;
            (ModelKind::Circle { radius }, Potential::Fourier(fourier(kv, "v.")?))
        }
        "sphere" => {
            kv.check_keys(|k| matches!(k, "kind" | "radius" | "resolution") || k.starts_with("v.poly."))?;
            let radius = kv.require_f64("radius")?;
            let mut coeffs = Vec::new();
            for (k, _) in kv.iter().filter(|(k, _)| k.starts_with("v.poly.")) {
                let line = kv.line_of(k);
                let idx = parse_usize(line, &k["v.poly.".len()..])?;
                if idx >= 64 {
                    return parse_err(line, "polynomial degree above 63 is not supported");
                }
                if coeffs.len() <= idx {
                    coeffs.resize(idx + 1, 0.0);
                }
                coeffs[idx] = kv.require_f64(k)?;
            }
            (ModelKind::Sphere { radius }, Potential::AxialPolynomial { coeffs })
        }
        "torus" => {
            kv.check_keys(|k| {
                matches!(k, "kind" | "a" | "b" | "resolution") || k.starts_with("v.x.") || k.starts_with("v.y.")
            })?;
            let a = kv.require_f64("a")?;
            let b = kv.require_f64("b")?;
            let x = fourier(kv, "v.x.")?;
            let y = fourier(kv, "v.y.")?;
            (ModelKind::Torus { a, b }, Potential::Separable { x, y })
        }
        other => return parse_err(kind_line, format!("unknown model kind `{other}` (expected circle, sphere or torus)")),
    };
    let model = ModelManifold::new(kind, potential).map_err(|e| Error::Parse { line: kind_line, message: e.to_string() })?;
    Ok(ModelConfig { model, resolution })
}

fn fourier(kv: &KeyValues, prefix: &str) -> Result<FourierSeries> {
    let mut series = FourierSeries::default();
    for (k, _) in kv.iter().filter(|(k, _)| k.starts_with(prefix)) {
        let line = kv.line_of(k);
        let rest = &k[prefix.len()..];
        let value = kv.require_f64(k)?;
        if rest == "const" {
            series.constant = value;
        } else if let Some(order) = rest.strip_prefix("cos.") {
            series.cos.push((parse_order(line, order)?, value));
        } else if let Some(order) = rest.strip_prefix("sin.") {
            series.sin.push((parse_order(line, order)?, value));
        } else {
            return parse_err(line, format!("unknown potential key `{k}`"));
        }
    }
    series.cos.sort_by_key(|&(k, _)| k);
    series.sin.sort_by_key(|&(k, _)| k);
    Ok(series)
}

fn parse_order(line: usize, s: &str) -> Result<u32> {
    s.parse::<u32>()
        .ok()
        .filter(|&k| k >= 1)
        .map_or_else(|| parse_err(line, format!("`{s}` is not a positive harmonic order")), Ok)
}

/// A budget plus the optional externally supplied constants.
#[derive(Clone, Debug)]
pub struct BudgetConfig {
    pub budget: GeometryBudget,
    pub delta1: Option<f64>,
    pub c_g: Option<f64>,
}

/// Reads `n, N, i0, Lambda1, Lambda2, Lambda3, V, D, E, w, A, B, delta1, C_G`.
pub fn budget_from_config(kv: &KeyValues) -> Result<BudgetConfig> {
    const KEYS: [&str; 14] =
        ["n", "N", "i0", "Lambda1", "Lambda2", "Lambda3", "V", "D", "E", "w", "A", "B", "delta1", "C_G"];
    kv.check_keys(|k| KEYS.contains(&k))?;
    let n = kv.usize("n")?.map_or_else(|| parse_err(kv.line_of("n"), "missing required key `n`"), Ok)?;
    let budget = GeometryBudget {
        n,
        big_n: kv.f64("N")?.unwrap_or(n as f64),
        i0: kv.require_f64("i0")?,
        lambda1: kv.require_f64("Lambda1")?,
        lambda2: kv.require_f64("Lambda2")?,
        lambda3: kv.f64("Lambda3")?,
        v: kv.require_f64("V")?,
        d: kv.require_f64("D")?,
        e: kv.f64("E")?,
        w: kv.require_f64("w")?,
        a: kv.require_f64("A")?,
        b: kv.require_f64("B")?,
    };
    budget.validate().map_err(|e| Error::Parse { line: kv.last_line, message: e.to_string() })?;
    Ok(BudgetConfig { budget, delta1: kv.f64("delta1")?, c_g: kv.f64("C_G")? })
}
