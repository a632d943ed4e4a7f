//! Coefficient profiles `b = (b_ij)` and sampling of `X = (b_ij ξ_ij)`.
//!
//! Entry `(i, j)` of a sample is drawn from a stream keyed by
//! `(seed, i, j)`, so a sample is a pure function of `(profile, dist, seed)`
//! no matter which order or thread produces the entries. A zero coefficient
//! yields an exact `+0.0` entry without consuming a draw.

use std::fmt;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dist::{DistSpec, Sampler};
use crate::error::{Error, Result};
use crate::rng::{stream, Domain};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Symmetric(usize),
    Rectangular { rows: usize, cols: usize },
}

impl Shape {
    pub fn dims(self) -> (usize, usize) {
        match self {
            Shape::Symmetric(n) => (n, n),
            Shape::Rectangular { rows, cols } => (rows, cols),
        }
    }
}

/// A validated nonnegative coefficient matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Profile {
    shape: Shape,
    entries: DMatrix<f64>,
    label: String,
}

impl Profile {
    /// Symmetric profile from a square matrix; entries must be finite,
    /// nonnegative and exactly symmetric.
    pub fn symmetric(entries: DMatrix<f64>, label: impl Into<String>) -> Result<Self> {
        let mut problems = Vec::new();
        if entries.nrows() == 0 {
            problems.push("profile must have n >= 1".to_string());
        }
        if entries.nrows() != entries.ncols() {
            return Err(Error::Shape(format!(
                "symmetric profile must be square, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        check_entries(&entries, &mut problems);
        let n = entries.nrows();
        'outer: for j in 0..n {
            for i in (j + 1)..n {
                if entries[(i, j)] != entries[(j, i)] {
                    problems.push(format!("b[{i}][{j}] != b[{j}][{i}]"));
                    break 'outer;
                }
            }
        }
        if !problems.is_empty() {
            return Err(Error::Validation(problems.join("; ")));
        }
        Ok(Profile {
            shape: Shape::Symmetric(n),
            entries,
            label: label.into(),
        })
    }

    pub fn rectangular(entries: DMatrix<f64>, label: impl Into<String>) -> Result<Self> {
        let (rows, cols) = entries.shape();
        let mut problems = Vec::new();
        if rows == 0 || cols == 0 {
            problems.push(format!(
                "rectangular profile must be at least 1x1, got {rows}x{cols}"
            ));
        }
        check_entries(&entries, &mut problems);
        if !problems.is_empty() {
            return Err(Error::Validation(problems.join("; ")));
        }
        Ok(Profile {
            shape: Shape::Rectangular { rows, cols },
            entries,
            label: label.into(),
        })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn is_symmetric(&self) -> bool {
        matches!(self.shape, Shape::Symmetric(_))
    }

    /// Dimension `n` of a symmetric profile, column count of a rectangular one.
    pub fn n(&self) -> usize {
        self.shape.dims().1
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Multiplies every coefficient by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::parameter(
                "factor",
                format!("must be positive, got {factor}"),
            ));
        }
        Ok(Profile {
            shape: self.shape,
            entries: &self.entries * factor,
            label: format!("{}*{factor}", self.label),
        })
    }

    /// Simultaneous row/column permutation: `b'_{kl} = b_{π(k) π(l)}`
    /// with `perm` 0-indexed.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = match self.shape {
            Shape::Symmetric(n) => n,
            Shape::Rectangular { .. } => {
                return Err(Error::Shape(
                    "permutation requires a symmetric profile".into(),
                ))
            }
        };
        check_permutation(perm, n)?;
        let entries = DMatrix::from_fn(n, n, |k, l| self.entries[(perm[k], perm[l])]);
        Ok(Profile {
            shape: self.shape,
            entries,
            label: format!("{}[permuted]", self.label),
        })
    }

    /// Appends `extra` all-zero rows and columns to a symmetric profile.
    pub fn padded(&self, extra: usize) -> Result<Self> {
        let n = match self.shape {
            Shape::Symmetric(n) => n,
            Shape::Rectangular { .. } => {
                return Err(Error::Shape("padding requires a symmetric profile".into()))
            }
        };
        let m = n + extra;
        let entries = DMatrix::from_fn(m, m, |i, j| {
            if i < n && j < n {
                self.entries[(i, j)]
            } else {
                0.0
            }
        });
        Ok(Profile {
            shape: Shape::Symmetric(m),
            entries,
            label: format!("{}+pad{extra}", self.label),
        })
    }

    /// Loads a dense row-major CSV. A square exactly symmetric matrix
    /// becomes a symmetric profile, anything else a rectangular one.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let rows = read_csv_rows(path)?;
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != ncols) {
            return Err(Error::Validation(format!(
                "{}: row {bad} has {} columns, expected {ncols}",
                path.display(),
                rows[bad].len()
            )));
        }
        let m = DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]);
        let label = format!("csv:file={}", path.display());
        let square_symmetric =
            nrows == ncols && (0..nrows).all(|i| (0..i).all(|j| m[(i, j)] == m[(j, i)]));
        if square_symmetric {
            Profile::symmetric(m, label)
        } else {
            Profile::rectangular(m, label)
        }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let csv_err = |source| Error::Csv {
            path: path.to_path_buf(),
            source,
        };
        let mut writer = csv::WriterBuilder::new()
            .has_headers(false)
            .from_path(path)
            .map_err(csv_err)?;
        for i in 0..self.entries.nrows() {
            writer
                .write_record(self.entries.row(i).iter().map(|x| x.to_string()))
                .map_err(csv_err)?;
        }
        writer.flush().map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

fn check_entries(entries: &DMatrix<f64>, problems: &mut Vec<String>) {
    if let Some((idx, v)) = entries
        .iter()
        .enumerate()
        .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
    {
        let rows = entries.nrows().max(1);
        problems.push(format!(
            "entry b[{}][{}] = {v} is not a finite nonnegative value",
            idx % rows,
            idx / rows
        ));
    }
}

pub(crate) fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(Error::Argument(format!(
            "permutation has length {}, expected {n}",
            perm.len()
        )));
    }
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(Error::Argument(format!(
                "{perm:?} is not a permutation of 0..{n}"
            )));
        }
    }
    Ok(())
}

fn read_csv_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_err)?;
    let mut rows = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let row = record
            .iter()
            .filter(|f| !f.is_empty())
            .map(|f| {
                f.parse::<f64>().map_err(|_| {
                    Error::Validation(format!(
                        "{}: row {r}: `{f}` is not a number",
                        path.display()
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if !row.is_empty() {
            rows.push(row);
        }
    }
    Ok(rows)
}

/// All-ones symmetric `n × n` profile.
pub fn make_wigner(n: usize) -> Result<Profile> {
    if n == 0 {
        return Err(Error::Validation("wigner profile requires n >= 1".into()));
    }
    Profile::symmetric(DMatrix::from_element(n, n, 1.0), format!("wigner:n={n}"))
}

/// `b_ij = 1{|i-j| <= k}`.
pub fn make_band(n: usize, k: usize) -> Result<Profile> {
    if n == 0 {
        return Err(Error::Validation("band profile requires n >= 1".into()));
    }
    let entries = DMatrix::from_fn(n, n, |i, j| if i.abs_diff(j) <= k { 1.0 } else { 0.0 });
    Profile::symmetric(entries, format!("band:n={n},k={k}"))
}

/// Diagonal profile `diag(weights)`.
pub fn make_diagonal(weights: &[f64]) -> Result<Profile> {
    if weights.is_empty() {
        return Err(Error::Validation(
            "diagonal profile requires at least one weight".into(),
        ));
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return Err(Error::Validation(format!(
            "diagonal weight {w} is negative or not finite"
        )));
    }
    let n = weights.len();
    let entries = DMatrix::from_fn(n, n, |i, j| if i == j { weights[i] } else { 0.0 });
    Profile::symmetric(entries, format!("diag:n={n}"))
}

/// All-zero symmetric profile.
pub fn make_zero(n: usize) -> Result<Profile> {
    if n == 0 {
        return Err(Error::Validation("zero profile requires n >= 1".into()));
    }
    Profile::symmetric(DMatrix::zeros(n, n), format!("zero:n={n}"))
}

/// All-ones rectangular `rows × cols` profile.
pub fn make_ones_rectangular(rows: usize, cols: usize) -> Result<Profile> {
    Profile::rectangular(
        DMatrix::from_element(rows, cols, 1.0),
        format!("ones:rows={rows},cols={cols}"),
    )
}

/// Named generators accepted on the command line.
#[derive(Clone, Debug, PartialEq)]
pub enum ProfileDescriptor {
    Wigner { n: usize },
    Band { n: usize, k: usize },
    DiagOnes { n: usize },
    DiagFile { path: PathBuf },
    Zero { n: usize },
    Ones { rows: usize, cols: usize },
    Csv { path: PathBuf },
}

impl ProfileDescriptor {
    /// Parses `kind:key=value,...`, e.g. `wigner:n=100`, `band:n=64,k=3`,
    /// `diag:file=weights.csv`, `diag:n=100`, `zero:n=5`,
    /// `ones:rows=200,cols=20`, `csv:file=b.csv`.
    pub fn parse(text: &str) -> Result<Self> {
        let malformed = |why: String| {
            Error::Validation(format!("malformed profile descriptor `{text}`: {why}"))
        };
        let (kind, rest) = text
            .split_once(':')
            .ok_or_else(|| malformed("expected `kind:key=value,...`".into()))?;
        let mut pairs = Vec::new();
        for part in rest.split(',').filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| malformed(format!("`{part}` is not key=value")))?;
            pairs.push((k.trim(), v.trim()));
        }
        let get = |key: &str| pairs.iter().find(|(k, _)| *k == key).map(|(_, v)| *v);
        let count = |key: &str, min: usize| -> Result<usize> {
            let raw = get(key).ok_or_else(|| malformed(format!("missing `{key}`")))?;
            let v: usize = raw
                .parse()
                .map_err(|_| malformed(format!("`{key}={raw}` is not a nonnegative integer")))?;
            if v < min {
                return Err(malformed(format!("`{key}` must be >= {min}, got {v}")));
            }
            Ok(v)
        };
        let allowed: &[&str] = match kind {
            "wigner" | "zero" => &["n"],
            "band" => &["n", "k"],
            "diag" => &["n", "file"],
            "ones" => &["rows", "cols"],
            "csv" => &["file"],
            other => return Err(malformed(format!("unknown generator `{other}`"))),
        };
        if let Some((k, _)) = pairs.iter().find(|(k, _)| !allowed.contains(k)) {
            return Err(malformed(format!("unexpected key `{k}` for `{kind}`")));
        }
        Ok(match kind {
            "wigner" => ProfileDescriptor::Wigner { n: count("n", 1)? },
            "zero" => ProfileDescriptor::Zero { n: count("n", 1)? },
            "band" => ProfileDescriptor::Band {
                n: count("n", 1)?,
                k: count("k", 0)?,
            },
            "diag" => match (get("file"), get("n")) {
                (Some(path), None) => ProfileDescriptor::DiagFile { path: path.into() },
                (None, Some(_)) => ProfileDescriptor::DiagOnes { n: count("n", 1)? },
                _ => return Err(malformed("diag takes exactly one of `file` or `n`".into())),
            },
            "ones" => ProfileDescriptor::Ones {
                rows: count("rows", 1)?,
                cols: count("cols", 1)?,
            },
            "csv" => ProfileDescriptor::Csv {
                path: get("file")
                    .ok_or_else(|| malformed("missing `file`".into()))?
                    .into(),
            },
            _ => unreachable!(),
        })
    }

    pub fn build(&self) -> Result<Profile> {
        let profile = match self {
            ProfileDescriptor::Wigner { n } => make_wigner(*n)?,
            ProfileDescriptor::Band { n, k } => make_band(*n, *k)?,
            ProfileDescriptor::DiagOnes { n } => make_diagonal(&vec![1.0; *n])?,
            ProfileDescriptor::DiagFile { path } => {
                let weights: Vec<f64> = read_csv_rows(path)?.into_iter().flatten().collect();
                make_diagonal(&weights)?
            }
            ProfileDescriptor::Zero { n } => make_zero(*n)?,
            ProfileDescriptor::Ones { rows, cols } => make_ones_rectangular(*rows, *cols)?,
            ProfileDescriptor::Csv { path } => Profile::read_csv(path)?,
        };
        Ok(profile.with_label(self.to_string()))
    }
}

impl fmt::Display for ProfileDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileDescriptor::Wigner { n } => write!(f, "wigner:n={n}"),
            ProfileDescriptor::Band { n, k } => write!(f, "band:n={n},k={k}"),
            ProfileDescriptor::DiagOnes { n } => write!(f, "diag:n={n}"),
            ProfileDescriptor::DiagFile { path } => write!(f, "diag:file={}", path.display()),
            ProfileDescriptor::Zero { n } => write!(f, "zero:n={n}"),
            ProfileDescriptor::Ones { rows, cols } => write!(f, "ones:rows={rows},cols={cols}"),
            ProfileDescriptor::Csv { path } => write!(f, "csv:file={}", path.display()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    Symmetric,
    Rectangular,
}

/// One draw of a structured random matrix. Immutable after construction.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledMatrix {
    pub values: DMatrix<f64>,
    pub kind: MatrixKind,
    pub profile_id: String,
    pub seed: u64,
    pub dist: DistSpec,
}

#[inline]
pub(crate) fn draw_symmetric_entry(
    sampler: &Sampler,
    seed: u64,
    i: usize,
    j: usize,
    weight: f64,
) -> f64 {
    if weight == 0.0 {
        return 0.0;
    }
    let mut rng = stream(seed, Domain::SymmetricEntry, &[i as u64, j as u64]);
    weight * sampler.sample(&mut rng)
}

#[inline]
pub(crate) fn draw_rectangular_entry(
    sampler: &Sampler,
    seed: u64,
    i: usize,
    j: usize,
    weight: f64,
) -> f64 {
    if weight == 0.0 {
        return 0.0;
    }
    let mut rng = stream(seed, Domain::RectangularEntry, &[i as u64, j as u64]);
    weight * sampler.sample(&mut rng)
}

/// Draws `X` with `X_ij = X_ji = b_ij ξ_ij` for `i >= j`.
pub fn sample_symmetric(profile: &Profile, dist: &DistSpec, seed: u64) -> Result<SampledMatrix> {
    let n = match profile.shape() {
        Shape::Symmetric(n) => n,
        Shape::Rectangular { rows, cols } => {
            return Err(Error::Shape(format!(
                "sample_symmetric needs a symmetric profile, got {rows}x{cols} rectangular"
            )))
        }
    };
    let sampler = dist.sampler();
    let mut values = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in j..n {
            let x = draw_symmetric_entry(&sampler, seed, i, j, profile.get(i, j));
            values[(i, j)] = x;
            values[(j, i)] = x;
        }
    }
    Ok(SampledMatrix {
        values,
        kind: MatrixKind::Symmetric,
        profile_id: profile.label().to_string(),
        seed,
        dist: *dist,
    })
}

/// Draws an `rows × cols` matrix with all entries independent.
pub fn sample_rectangular(
    rows: usize,
    cols: usize,
    profile: &Profile,
    dist: &DistSpec,
    seed: u64,
) -> Result<SampledMatrix> {
    match profile.shape() {
        Shape::Rectangular { rows: r, cols: c } if r == rows && c == cols => {}
        other => {
            return Err(Error::Shape(format!(
                "sample_rectangular({rows}, {cols}) needs a matching rectangular profile, got {other:?}"
            )))
        }
    }
    let sampler = dist.sampler();
    let values = DMatrix::from_fn(rows, cols, |i, j| {
        draw_rectangular_entry(&sampler, seed, i, j, profile.get(i, j))
    });
    Ok(SampledMatrix {
        values,
        kind: MatrixKind::Rectangular,
        profile_id: profile.label().to_string(),
        seed,
        dist: *dist,
    })
}

/// Symmetric dilation `[[0, A], [Aᵀ, 0]]` of a rectangular sample.
pub fn dilate(a: &SampledMatrix) -> Result<SampledMatrix> {
    if a.kind != MatrixKind::Rectangular {
        return Err(Error::Shape("dilate expects a rectangular sample".into()));
    }
    let (rows, cols) = a.values.shape();
    let m = rows + cols;
    let mut values = DMatrix::zeros(m, m);
    values
        .view_mut((0, rows), (rows, cols))
        .copy_from(&a.values);
    values
        .view_mut((rows, 0), (cols, rows))
        .copy_from(&a.values.transpose());
    Ok(SampledMatrix {
        values,
        kind: MatrixKind::Symmetric,
        profile_id: format!("dilate({})", a.profile_id),
        seed: a.seed,
        dist: a.dist,
    })
}

/// A connected block of the support graph of a symmetric profile.
#[derive(Clone, Debug)]
pub struct SupportComponent {
    /// Global node indices, ascending.
    pub nodes: Vec<usize>,
    /// Lower-triangular entries `(local_i, local_j, global_i, global_j, b)`
    /// with `local_i >= local_j` and `b > 0`.
    pub entries: Vec<(usize, usize, usize, usize, f64)>,
}

/// Support of a symmetric profile split into connected components of the
/// graph `i ~ j ⟺ b_ij > 0`. The spectral norm of any sample is the
/// maximum of the norms of its component blocks.
#[derive(Clone, Debug)]
pub struct SymmetricSupport {
    pub n: usize,
    pub components: Vec<SupportComponent>,
}

impl SymmetricSupport {
    pub fn from_profile(profile: &Profile) -> Result<Self> {
        let n = match profile.shape() {
            Shape::Symmetric(n) => n,
            _ => return Err(Error::Shape("support requires a symmetric profile".into())),
        };
        Ok(Self::from_lower(n, |i, j| profile.get(i, j)))
    }

    /// Builds the support from a lower-triangle accessor.
    pub fn from_lower(n: usize, weight: impl Fn(usize, usize) -> f64) -> Self {
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let mut nonzero = Vec::new();
        for j in 0..n {
            for i in j..n {
                let b = weight(i, j);
                if b != 0.0 {
                    nonzero.push((i, j, b));
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    if ri != rj {
                        parent[ri.max(rj)] = ri.min(rj);
                    }
                }
            }
        }
        // roots are the smallest index of their component
        let mut slot = vec![usize::MAX; n];
        let mut local = vec![0usize; n];
        let mut components: Vec<SupportComponent> = Vec::new();
        for (v, lv) in local.iter_mut().enumerate() {
            let r = find(&mut parent, v);
            if slot[r] == usize::MAX {
                slot[r] = components.len();
                components.push(SupportComponent {
                    nodes: Vec::new(),
                    entries: Vec::new(),
                });
            }
            let c = &mut components[slot[r]];
            *lv = c.nodes.len();
            c.nodes.push(v);
        }
        for (i, j, b) in nonzero {
            let c = slot[find(&mut parent, i)];
            components[c].entries.push((local[i], local[j], i, j, b));
        }
        components.retain(|c| !c.entries.is_empty());
        SymmetricSupport { n, components }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::weibull_sym_cdf;
    use crate::stats::{kolmogorov_sf, ks_statistic, NeumaierSum};

    #[test]
    fn generators() {
        let w = make_wigner(3).unwrap();
        assert!(w.entries().iter().all(|&x| x == 1.0));
        let b0 = make_band(5, 0).unwrap();
        assert_eq!(b0.entries(), &DMatrix::<f64>::identity(5, 5));
        let b1 = make_band(5, 1).unwrap();
        assert_eq!(b1.get(2, 1), 1.0);
        assert_eq!(b1.get(3, 1), 0.0);
        assert_eq!(
            make_band(5, 10).unwrap().entries(),
            make_wigner(5).unwrap().entries()
        );
        assert_eq!(
            make_diagonal(&[1.0, 1.0, 1.0]).unwrap().entries(),
            &DMatrix::<f64>::identity(3, 3)
        );
        assert!(make_diagonal(&[1.0, -1.0]).is_err());
        assert!(make_diagonal(&[]).is_err());
        assert!(make_wigner(0).is_err());
    }

    #[test]
    fn symmetric_validation() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.5, 1.0]);
        assert!(matches!(
            Profile::symmetric(m, "x"),
            Err(Error::Validation(_))
        ));
        let m = DMatrix::from_row_slice(1, 2, &[1.0, 2.0]);
        assert!(matches!(Profile::symmetric(m, "x"), Err(Error::Shape(_))));
        let m = DMatrix::from_row_slice(1, 1, &[f64::NAN]);
        assert!(Profile::symmetric(m, "x").is_err());
    }

    #[test]
    fn single_entry_sample_is_scaled_draw() {
        let p = make_diagonal(&[1.0]).unwrap();
        let dist = DistSpec::weibull(1.0).unwrap();
        let s = sample_symmetric(&p, &dist, 9).unwrap();
        let mut rng = stream(9, Domain::SymmetricEntry, &[0, 0]);
        assert_eq!(s.values[(0, 0)], dist.sampler().sample(&mut rng));
    }

    #[test]
    fn zero_profile_samples_zero() {
        let p = make_diagonal(&[0.0, 0.0]).unwrap();
        let s = sample_symmetric(&p, &DistSpec::weibull(1.0).unwrap(), 1).unwrap();
        assert!(s.values.iter().all(|x| x.to_bits() == 0));
    }

    #[test]
    fn sampling_is_deterministic_and_exactly_symmetric() {
        let p = make_band(12, 3).unwrap();
        let dist = DistSpec::weibull(0.7).unwrap();
        let a = sample_symmetric(&p, &dist, 42).unwrap();
        let b = sample_symmetric(&p, &dist, 42).unwrap();
        assert_eq!(a, b);
        for i in 0..12 {
            for j in 0..12 {
                assert_eq!(a.values[(i, j)].to_bits(), a.values[(j, i)].to_bits());
            }
        }
        let c = sample_symmetric(&p, &dist, 43).unwrap();
        assert_ne!(a.values, c.values);
        assert!(matches!(
            sample_symmetric(&make_ones_rectangular(2, 3).unwrap(), &dist, 0),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn rectangular_sampling() {
        let dist = DistSpec::weibull(1.0).unwrap();
        let p = make_ones_rectangular(1, 1).unwrap();
        let s = sample_rectangular(1, 1, &p, &dist, 5).unwrap();
        let mut rng = stream(5, Domain::RectangularEntry, &[0, 0]);
        assert_eq!(s.values[(0, 0)], dist.sampler().sample(&mut rng));
        assert_eq!(s, sample_rectangular(1, 1, &p, &dist, 5).unwrap());
        assert!(sample_rectangular(2, 1, &p, &dist, 5).is_err());
    }

    #[test]
    fn rectangular_entry_variance_matches_second_moment() {
        let alpha = 1.5;
        let dist = DistSpec::weibull(alpha).unwrap();
        let p = make_ones_rectangular(100, 100).unwrap();
        let mut acc = NeumaierSum::default();
        let mut count = 0usize;
        for seed in 0..20 {
            let s = sample_rectangular(100, 100, &p, &dist, seed).unwrap();
            s.values.iter().for_each(|x| acc.add(x * x));
            count += s.values.len();
        }
        let second = acc.sum() / count as f64;
        let exact = crate::dist::weibull_moment(alpha, 2.0).unwrap().powi(2);
        assert!((second / exact - 1.0).abs() < 0.02, "{second} vs {exact}");
    }

    #[test]
    fn dilation_layout() {
        let dist = DistSpec::weibull(1.0).unwrap();
        let a = SampledMatrix {
            values: DMatrix::from_element(1, 1, 2.0),
            kind: MatrixKind::Rectangular,
            profile_id: "x".into(),
            seed: 0,
            dist,
        };
        let d = dilate(&a).unwrap();
        assert_eq!(
            d.values,
            DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 2.0, 0.0])
        );
        assert!(dilate(&d).is_err());
        let zero = SampledMatrix {
            values: DMatrix::zeros(3, 2),
            ..a
        };
        assert!(dilate(&zero).unwrap().values.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn wigner_entry_marginal_passes_ks() {
        let alpha = 1.0;
        let dist = DistSpec::weibull(alpha).unwrap();
        let p = make_wigner(3).unwrap();
        let sample: Vec<f64> = (0..100_000u64)
            .map(|seed| sample_symmetric(&p, &dist, seed).unwrap().values[(0, 1)])
            .collect();
        let d = ks_statistic(&sample, |x| weibull_sym_cdf(alpha, x));
        let pvalue = kolmogorov_sf(d * (sample.len() as f64).sqrt());
        assert!(pvalue > 1e-3, "KS p-value {pvalue}");
    }

    #[test]
    fn descriptors() {
        assert_eq!(
            ProfileDescriptor::parse("wigner:n=100").unwrap(),
            ProfileDescriptor::Wigner { n: 100 }
        );
        assert_eq!(
            ProfileDescriptor::parse("band:n=64,k=3").unwrap(),
            ProfileDescriptor::Band { n: 64, k: 3 }
        );
        assert_eq!(
            ProfileDescriptor::parse("diag:file=w.csv").unwrap(),
            ProfileDescriptor::DiagFile {
                path: "w.csv".into()
            }
        );
        for bad in [
            "wigner:n=0",
            "wigner",
            "wigner:n=x",
            "band:n=4",
            "torus:n=3",
            "wigner:n=3,k=1",
            "diag:",
        ] {
            assert!(ProfileDescriptor::parse(bad).is_err(), "{bad}");
        }
        let d = ProfileDescriptor::parse("band:n=6,k=1").unwrap();
        assert_eq!(d.to_string(), "band:n=6,k=1");
        assert_eq!(d.build().unwrap().label(), "band:n=6,k=1");
    }

    #[test]
    fn csv_round_trip_and_diag_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("b.csv");
        let p = make_band(4, 1).unwrap().scaled(0.3).unwrap();
        p.write_csv(&path).unwrap();
        let back = Profile::read_csv(&path).unwrap();
        assert!(back.is_symmetric());
        assert_eq!(back.entries(), p.entries());

        let rect = path.with_file_name("r.csv");
        std::fs::write(&rect, "1,2,3\n4,5,6\n").unwrap();
        assert_eq!(
            Profile::read_csv(&rect).unwrap().shape(),
            Shape::Rectangular { rows: 2, cols: 3 }
        );

        let w = path.with_file_name("w.csv");
        std::fs::write(&w, "1\n3\n2\n").unwrap();
        let d = ProfileDescriptor::parse(&format!("diag:file={}", w.display()))
            .unwrap()
            .build()
            .unwrap();
        assert_eq!(d.get(1, 1), 3.0);
        assert_eq!(d.get(0, 1), 0.0);
    }

    #[test]
    fn support_components() {
        let s = SymmetricSupport::from_profile(&make_diagonal(&[1.0, 0.0, 2.0]).unwrap()).unwrap();
        assert_eq!(s.components.len(), 2);
        assert_eq!(s.components[0].nodes, vec![0]);
        assert_eq!(s.components[1].nodes, vec![2]);

        let s = SymmetricSupport::from_profile(&make_band(6, 2).unwrap()).unwrap();
        assert_eq!(s.components.len(), 1);
        assert_eq!(s.components[0].nodes.len(), 6);

        let mut m = DMatrix::zeros(4, 4);
        m[(3, 0)] = 1.0;
        m[(0, 3)] = 1.0;
        m[(1, 2)] = 1.0;
        m[(2, 1)] = 1.0;
        let s = SymmetricSupport::from_profile(&Profile::symmetric(m, "x").unwrap()).unwrap();
        assert_eq!(s.components.len(), 2);
        assert_eq!(s.components[0].nodes, vec![0, 3]);
        assert_eq!(s.components[0].entries, vec![(1, 0, 3, 0, 1.0)]);
    }
}
