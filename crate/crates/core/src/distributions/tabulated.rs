use std::io::Read;
use std::path::Path;

use super::{PriceDistribution, Side, Support};
use crate::error::{Error, Result};

/// Histogram law: piecewise-constant density over ascending bin edges.
///
/// The density is right-continuous: at an interior edge it takes the value
/// of the bin starting there, and it is zero at and beyond the last edge.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedDist {
    edges: Vec<f64>,
    masses: Vec<f64>,
    // cum[i] = mass strictly left of edges[i]
    cum: Vec<f64>,
}

impl TabulatedDist {
    pub fn new(edges: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 {
            return Err(Error::invalid("tabulated distribution needs at least two edges"));
        }
        if masses.len() + 1 != edges.len() {
            return Err(Error::invalid(format!(
                "expected {} masses for {} edges, got {}",
                edges.len() - 1,
                edges.len(),
                masses.len()
            )));
        }
        if edges.iter().any(|e| !e.is_finite()) {
            return Err(Error::invalid("bin edges must be finite"));
        }
        if edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("bin edges must be strictly ascending"));
        }
        if masses.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return Err(Error::invalid("bin masses must be finite and nonnegative"));
        }
        let total: f64 = masses.iter().sum();
        if !(total > 0.0) {
            return Err(Error::invalid("total bin mass must be positive"));
        }
        let masses: Vec<f64> = masses.iter().map(|m| m / total).collect();
        let mut cum = Vec::with_capacity(edges.len());
        let mut acc = 0.0;
        cum.push(0.0);
        for m in &masses {
            acc += m;
            cum.push(acc);
        }
        // Pin the last value so the cdf reaches exactly one.
        *cum.last_mut().unwrap() = 1.0;
        Ok(TabulatedDist { edges, masses, cum })
    }

    /// Reads the two-column `edge,mass` CSV format.
    ///
    /// Each row carries one bin edge; the mass column holds the mass of the
    /// bin starting at that edge. The final row closes the last bin and its
    /// mass cell must be empty (or the column omitted).
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(csv_err)?.clone();
        let names: Vec<&str> = headers.iter().collect();
        if names != ["edge", "mass"] {
            return Err(Error::invalid(format!("expected header `edge,mass`, got `{}`", names.join(","))));
        }
        let mut rows: Vec<(f64, Option<f64>)> = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let record = record.map_err(csv_err)?;
            let line = i + 2;
            let edge_cell = record.get(0).unwrap_or("");
            let edge: f64 =
                edge_cell.parse().map_err(|_| Error::invalid(format!("line {line}: bad edge `{edge_cell}`")))?;
            let mass = match record.get(1) {
                None | Some("") => None,
                Some(s) => Some(s.parse::<f64>().map_err(|_| Error::invalid(format!("line {line}: bad mass `{s}`")))?),
            };
            if record.len() > 2 {
                return Err(Error::invalid(format!("line {line}: expected at most two columns")));
            }
            rows.push((edge, mass));
        }
        let Some((_, last_mass)) = rows.last() else {
            return Err(Error::invalid("CSV has no rows"));
        };
        if last_mass.is_some() {
            return Err(Error::invalid("the final row closes the last bin and must have an empty mass"));
        }
        let n = rows.len();
        let mut edges = Vec::with_capacity(n);
        let mut masses = Vec::with_capacity(n.saturating_sub(1));
        for (i, (edge, mass)) in rows.into_iter().enumerate() {
            edges.push(edge);
            if i + 1 < n {
                masses.push(mass.ok_or_else(|| Error::invalid(format!("line {}: missing mass", i + 2)))?);
            }
        }
        TabulatedDist::new(edges, masses)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        TabulatedDist::from_csv_reader(std::io::BufReader::new(file))
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    /// Normalised bin masses.
    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// Index of the bin containing `p` under the right-continuous convention.
    fn bin_of(&self, p: f64) -> Option<usize> {
        if !(p >= self.edges[0]) || p >= *self.edges.last().unwrap() {
            return None;
        }
        Some(self.edges.partition_point(|e| *e <= p) - 1)
    }

    fn width(&self, i: usize) -> f64 {
        self.edges[i + 1] - self.edges[i]
    }

    // ∫_{-inf}^{b} p density(p) dp
    fn lower_moment(&self, b: f64) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.masses.len() {
            let (l, r) = (self.edges[i], self.edges[i + 1]);
            if b <= l {
                break;
            }
            let hi = b.min(r);
            acc += self.masses[i] / self.width(i) * 0.5 * (hi - l) * (hi + l);
        }
        acc
    }

    fn upper_moment(&self, b: f64) -> f64 {
        let mut acc = 0.0;
        for i in (0..self.masses.len()).rev() {
            let (l, r) = (self.edges[i], self.edges[i + 1]);
            if b >= r {
                break;
            }
            let lo = b.max(l);
            acc += self.masses[i] / self.width(i) * 0.5 * (r - lo) * (r + lo);
        }
        acc
    }
}

fn csv_err(e: csv::Error) -> Error {
    match e.kind() {
        csv::ErrorKind::Io(_) => Error::Io(e.to_string()),
        _ => Error::invalid(format!("malformed CSV: {e}")),
    }
}

impl PriceDistribution for TabulatedDist {
    fn density(&self, p: f64) -> f64 {
        match self.bin_of(p) {
            Some(i) => self.masses[i] / self.width(i),
            None => 0.0,
        }
    }

    fn cdf(&self, p: f64) -> f64 {
        if !(p > self.edges[0]) {
            return 0.0;
        }
        match self.bin_of(p) {
            Some(i) => self.cum[i] + self.masses[i] * (p - self.edges[i]) / self.width(i),
            None => 1.0,
        }
    }

    fn sf(&self, p: f64) -> f64 {
        if !(p > self.edges[0]) {
            return 1.0;
        }
        match self.bin_of(p) {
            Some(i) => (1.0 - self.cum[i + 1]) + self.masses[i] * (self.edges[i + 1] - p) / self.width(i),
            None => 0.0,
        }
    }

    fn partial_first_moment(&self, bound: f64, side: Side) -> f64 {
        match side {
            Side::Below => self.lower_moment(bound),
            Side::Above => self.upper_moment(bound),
        }
    }

    fn support(&self) -> Support {
        Support { lower: self.edges[0], upper: *self.edges.last().unwrap() }
    }

    fn quantile(&self, u: f64) -> f64 {
        if !(u > 0.0) {
            return self.edges[0];
        }
        if u >= 1.0 {
            return *self.edges.last().unwrap();
        }
        // first bin whose right cumulative reaches u; it has positive mass
        let i = self.cum[1..].partition_point(|c| *c < u).min(self.masses.len() - 1);
        let frac = ((u - self.cum[i]) / self.masses[i]).clamp(0.0, 1.0);
        self.edges[i] + frac * self.width(i)
    }

    fn mean(&self) -> f64 {
        self.lower_moment(f64::INFINITY)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.edges.clone()
    }
}
