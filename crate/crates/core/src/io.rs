//! Text formats: surface data files, radial profiles, result records and
//! colatitude CSV profiles.
//!
//! A surface file looks like
//!
//! ```text
//! QLM-SURFACE 1
//! grid 16 32
//! G 1
//! provenance round_sphere(r=1)
//! array sigma11 512
//! 1.0000000000000000e0
//! ...
//! end
//! ```
//!
//! with node order colatitude-major. Reals are written with 17 significant
//! digits, so a write/read cycle is lossless.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;
use std::sync::Arc;

use crate::data::{BoundaryData, PhysicalSurfaceData};
use crate::error::{QlmError, Result};
use crate::jang::{RadialInitialData, RadialProfile, TabulatedProfile};
use crate::sphere::{CovectorField, MetricField, ScalarField, SphereGrid, SymTensorField};

pub const SURFACE_MAGIC: &str = "QLM-SURFACE";
pub const RADIAL_MAGIC: &str = "QLM-RADIAL";
pub const FORMAT_VERSION: u32 = 1;

/// Arrays recognized in a surface file.
pub const KNOWN_ARRAYS: [&str; 12] = [
    "sigma11", "sigma12", "sigma22", "h_norm", "alpha1", "alpha2", "tau", "k", "tr_p", "p_e3_1", "p_e3_2", "f3",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceDataFile {
    pub n_colat: usize,
    pub n_lon: usize,
    pub g: f64,
    pub provenance: String,
    pub arrays: BTreeMap<String, Vec<f64>>,
}

/// Writes `contents` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| QlmError::InvalidInput(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

fn parse_err(line: usize, message: impl Into<String>) -> QlmError {
    QlmError::Parse {
        line,
        message: message.into(),
    }
}

/// Reads `array name len` blocks and `key value` header lines.
struct Reader<'a> {
    lines: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
}

impl<'a> Reader<'a> {
    fn new(text: &'a str) -> Self {
        Reader {
            lines: text.lines().enumerate().peekable(),
        }
    }

    /// Next non-blank, non-comment line with its 1-based number.
    fn next(&mut self) -> Option<(usize, &'a str)> {
        for (i, l) in self.lines.by_ref() {
            let t = l.trim();
            if !t.is_empty() && !t.starts_with('#') {
                return Some((i + 1, t));
            }
        }
        None
    }

    fn header(&mut self, magic: &str) -> Result<()> {
        let (n, l) = self.next().ok_or_else(|| parse_err(1, "empty file"))?;
        let mut it = l.split_whitespace();
        if it.next() != Some(magic) {
            return Err(parse_err(n, format!("expected '{magic}' header")));
        }
        let v: u32 = it
            .next()
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| parse_err(n, "missing format version"))?;
        if v != FORMAT_VERSION {
            return Err(parse_err(n, format!("unsupported format version {v}")));
        }
        Ok(())
    }

    fn values(&mut self, name: &str, len: usize) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(len);
        while out.len() < len {
            let (n, l) = self
                .next()
                .ok_or_else(|| parse_err(0, format!("array '{name}' ends after {} of {len} values", out.len())))?;
            for tok in l.split_whitespace() {
                let v: f64 = tok.parse().map_err(|_| parse_err(n, format!("bad number '{tok}' in '{name}'")))?;
                if !v.is_finite() {
                    return Err(parse_err(n, format!("non-finite value in '{name}'")));
                }
                out.push(v);
            }
            if out.len() > len {
                return Err(parse_err(n, format!("array '{name}' has more than {len} values")));
            }
        }
        Ok(out)
    }
}

fn push_array(out: &mut String, name: &str, values: &[f64]) {
    let _ = writeln!(out, "array {name} {}", values.len());
    for v in values {
        let _ = writeln!(out, "{v:.16e}");
    }
}

impl SurfaceDataFile {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{SURFACE_MAGIC} {FORMAT_VERSION}");
        let _ = writeln!(out, "grid {} {}", self.n_colat, self.n_lon);
        let _ = writeln!(out, "G {:.16e}", self.g);
        let _ = writeln!(out, "provenance {}", self.provenance.replace('\n', " "));
        for (name, v) in &self.arrays {
            push_array(&mut out, name, v);
        }
        out.push_str("end\n");
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut r = Reader::new(text);
        r.header(SURFACE_MAGIC)?;
        let mut dims = None;
        let mut g = 1.0;
        let mut provenance = String::new();
        let mut arrays = BTreeMap::new();
        let mut ended = false;
        while let Some((n, l)) = r.next() {
            let (key, rest) = l.split_once(char::is_whitespace).unwrap_or((l, ""));
            let rest = rest.trim();
            match key {
                "grid" => {
                    let v: Vec<usize> = rest.split_whitespace().filter_map(|t| t.parse().ok()).collect();
                    if v.len() != 2 {
                        return Err(parse_err(n, "grid needs two integers"));
                    }
                    dims = Some((v[0], v[1]));
                }
                "G" => {
                    g = rest.parse().map_err(|_| parse_err(n, "bad G"))?;
                    if !(g > 0.0 && f64::is_finite(g)) {
                        return Err(parse_err(n, "G must be positive"));
                    }
                }
                "provenance" => provenance = rest.to_string(),
                "array" => {
                    let mut it = rest.split_whitespace();
                    let (name, len) = match (it.next(), it.next().and_then(|v| v.parse::<usize>().ok())) {
                        (Some(a), Some(b)) => (a.to_string(), b),
                        _ => return Err(parse_err(n, "array needs a name and a length")),
                    };
                    if !KNOWN_ARRAYS.contains(&name.as_str()) {
                        return Err(parse_err(n, format!("unknown array '{name}'")));
                    }
                    let (a, b) = dims.ok_or_else(|| parse_err(n, "array before grid line"))?;
                    if len != a * b {
                        return Err(parse_err(n, format!("array '{name}' has length {len}, grid needs {}", a * b)));
                    }
                    let v = r.values(&name, len)?;
                    if arrays.insert(name.clone(), v).is_some() {
                        return Err(parse_err(n, format!("duplicate array '{name}'")));
                    }
                }
                "end" => {
                    ended = true;
                    break;
                }
                _ => return Err(parse_err(n, format!("unknown key '{key}'"))),
            }
        }
        if !ended {
            return Err(parse_err(0, "missing 'end'"));
        }
        let (n_colat, n_lon) = dims.ok_or_else(|| parse_err(0, "missing grid line"))?;
        for req in ["sigma11", "sigma12", "sigma22"] {
            if !arrays.contains_key(req) {
                return Err(QlmError::InvalidInput(format!("surface file lacks required array '{req}'")));
            }
        }
        Ok(SurfaceDataFile {
            n_colat,
            n_lon,
            g,
            provenance,
            arrays,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.to_text())
    }

    pub fn grid(&self) -> Result<Arc<SphereGrid>> {
        SphereGrid::new(self.n_colat, self.n_lon)
    }

    fn field(&self, grid: &Arc<SphereGrid>, name: &str) -> Result<Option<ScalarField>> {
        self.arrays.get(name).map(|v| ScalarField::new(grid, v.clone())).transpose()
    }

    pub fn metric(&self, grid: &Arc<SphereGrid>) -> Result<MetricField> {
        let a = |k: &str| self.arrays[k].clone();
        MetricField::new(SymTensorField::new(grid, a("sigma11"), a("sigma12"), a("sigma22"))?)
    }

    /// Physical surface data. Requires `h_norm`; a missing connection form is
    /// taken as zero.
    pub fn surface_data(&self, grid: &Arc<SphereGrid>) -> Result<PhysicalSurfaceData> {
        let sigma = self.metric(grid)?;
        let h = self
            .field(grid, "h_norm")?
            .ok_or_else(|| QlmError::IncompleteData("surface file lacks 'h_norm'".into()))?;
        let alpha = match (self.arrays.get("alpha1"), self.arrays.get("alpha2")) {
            (Some(a), Some(b)) => CovectorField::new(grid, a.clone(), b.clone())?,
            (None, None) => CovectorField::zeros(grid),
            _ => return Err(QlmError::IncompleteData("only one connection-form component present".into())),
        };
        let mut data = PhysicalSurfaceData::new(sigma, h, alpha, self.provenance.clone())?;
        let parts = ["k", "tr_p", "p_e3_1", "p_e3_2"].map(|k| self.arrays.get(k));
        if parts.iter().all(Option::is_some) {
            let [k, t, p1, p2] = parts.map(|v| v.unwrap().clone());
            data = data.with_boundary(BoundaryData {
                k: ScalarField::new(grid, k)?,
                tr_p: ScalarField::new(grid, t)?,
                p_e3: CovectorField::new(grid, p1, p2)?,
            })?;
        } else if parts.iter().any(Option::is_some) {
            return Err(QlmError::IncompleteData("boundary data needs all of k, tr_p, p_e3_1, p_e3_2".into()));
        }
        Ok(data)
    }

    pub fn tau(&self, grid: &Arc<SphereGrid>) -> Result<Option<ScalarField>> {
        self.field(grid, "tau")
    }

    pub fn f3(&self, grid: &Arc<SphereGrid>) -> Result<Option<ScalarField>> {
        self.field(grid, "f3")
    }

    pub fn from_surface_data(data: &PhysicalSurfaceData, g: f64, tau: Option<&ScalarField>) -> Self {
        let grid = data.sigma.grid();
        let mut arrays = BTreeMap::new();
        let t = data.sigma.tensor();
        for (c, name) in ["sigma11", "sigma12", "sigma22"].iter().enumerate() {
            arrays.insert(name.to_string(), t.comp(c).to_vec());
        }
        arrays.insert("h_norm".into(), data.h_norm.values().to_vec());
        arrays.insert("alpha1".into(), data.alpha_hat.comp(0).to_vec());
        arrays.insert("alpha2".into(), data.alpha_hat.comp(1).to_vec());
        if let Some(b) = &data.boundary {
            arrays.insert("k".into(), b.k.values().to_vec());
            arrays.insert("tr_p".into(), b.tr_p.values().to_vec());
            arrays.insert("p_e3_1".into(), b.p_e3.comp(0).to_vec());
            arrays.insert("p_e3_2".into(), b.p_e3.comp(1).to_vec());
        }
        if let Some(t) = tau {
            arrays.insert("tau".into(), t.values().to_vec());
        }
        SurfaceDataFile {
            n_colat: grid.n_colat(),
            n_lon: grid.n_lon(),
            g,
            provenance: data.provenance.clone(),
            arrays,
        }
    }
}

/// Tabulated radial data: arrays `r`, `g_rr`, `rho`, `p_rr`, `p_tan`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialDataFile {
    pub provenance: String,
    pub arrays: BTreeMap<String, Vec<f64>>,
}

const RADIAL_ARRAYS: [&str; 5] = ["r", "g_rr", "rho", "p_rr", "p_tan"];

impl RadialDataFile {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{RADIAL_MAGIC} {FORMAT_VERSION}");
        let _ = writeln!(out, "provenance {}", self.provenance.replace('\n', " "));
        for (name, v) in &self.arrays {
            push_array(&mut out, name, v);
        }
        out.push_str("end\n");
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut r = Reader::new(text);
        r.header(RADIAL_MAGIC)?;
        let mut provenance = String::new();
        let mut arrays = BTreeMap::new();
        let mut ended = false;
        while let Some((n, l)) = r.next() {
            let (key, rest) = l.split_once(char::is_whitespace).unwrap_or((l, ""));
            match key {
                "provenance" => provenance = rest.trim().to_string(),
                "array" => {
                    let mut it = rest.split_whitespace();
                    let (name, len) = match (it.next(), it.next().and_then(|v| v.parse::<usize>().ok())) {
                        (Some(a), Some(b)) => (a.to_string(), b),
                        _ => return Err(parse_err(n, "array needs a name and a length")),
                    };
                    if !RADIAL_ARRAYS.contains(&name.as_str()) {
                        return Err(parse_err(n, format!("unknown array '{name}'")));
                    }
                    let v = r.values(&name, len)?;
                    arrays.insert(name, v);
                }
                "end" => {
                    ended = true;
                    break;
                }
                _ => return Err(parse_err(n, format!("unknown key '{key}'"))),
            }
        }
        if !ended {
            return Err(parse_err(0, "missing 'end'"));
        }
        let len = arrays.get("r").map(Vec::len);
        for name in RADIAL_ARRAYS {
            match arrays.get(name) {
                None => return Err(QlmError::InvalidInput(format!("radial file lacks '{name}'"))),
                Some(v) if Some(v.len()) != len => {
                    return Err(QlmError::InvalidInput(format!("radial array '{name}' has the wrong length")))
                }
                _ => {}
            }
        }
        Ok(RadialDataFile { provenance, arrays })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.to_text())
    }

    /// Initial data on the whole tabulated range, or on `[r_min, r_max]`.
    pub fn initial_data(&self, range: Option<(f64, f64)>) -> Result<RadialInitialData> {
        let a = |k: &str| self.arrays[k].as_slice();
        let t = TabulatedProfile::new(a("r"), a("g_rr"), a("rho"), a("p_rr"), a("p_tan"))?;
        let r = a("r");
        let (lo, hi) = range.unwrap_or((r[0], r[r.len() - 1]));
        RadialInitialData::new(lo, hi, RadialProfile::Tabulated(t))
    }
}

/// Flat ordered `key = value` record.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultRecord {
    pub entries: Vec<(String, String)>,
}

impl ResultRecord {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn push_real(&mut self, key: impl Into<String>, value: f64) {
        self.push(key, format!("{value:.16e}"));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {}", v.replace('\n', " "));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, l) in text.lines().enumerate() {
            if l.trim().is_empty() {
                continue;
            }
            let (k, v) = l.split_once(" = ").ok_or_else(|| parse_err(i + 1, "expected 'key = value'"))?;
            entries.push((k.trim().to_string(), v.to_string()));
        }
        Ok(ResultRecord { entries })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.to_text())
    }
}

/// Longitude averages of each field per colatitude ring, as CSV.
pub fn colatitude_profiles(fields: &[(&str, &ScalarField)]) -> Result<String> {
    let grid = match fields.first() {
        Some((_, f)) => f.grid().clone(),
        None => return Err(QlmError::InvalidInput("no fields to profile".into())),
    };
    if fields.iter().any(|(_, f)| !crate::sphere::same_grid(&grid, f.grid())) {
        return Err(QlmError::GridMismatch);
    }
    let mut out = String::from("colatitude");
    for (name, _) in fields {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    let nl = grid.n_lon();
    for j in 0..grid.n_colat() {
        let _ = write!(out, "{:.16e}", grid.coords(j * nl).0);
        for (_, f) in fields {
            let ring = &f.values()[j * nl..(j + 1) * nl];
            let _ = write!(out, ",{:.16e}", ring.iter().sum::<f64>() / nl as f64);
        }
        out.push('\n');
    }
    Ok(out)
}
