//! Databases of sampled designs and their shape representations.

use std::io::{BufRead, BufReader, Read, Write};

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::family::{catenoid_in_envelope, Family};
use super::mapping::MappingSpec;
use crate::error::{Error, Result};
use crate::linalg::cholesky_with_jitter;

/// How designs are drawn.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Sampler {
    /// Uniform in the family's design box.
    Uniform,
    /// Catenoid perturbations from a squared-exponential process pinned to
    /// zero at both ends, rejecting curves that leave the envelope.
    GaussianPrior { lengthscale: f64, sd: f64 },
}

impl Sampler {
    /// Uniform for every family except the catenoid, whose prior has a
    /// length-scale of a sixth of the segment.
    pub fn default_for(family: Family) -> Self {
        match family {
            Family::Catenoid => Sampler::GaussianPrior {
                lengthscale: 1.0 / 6.0,
                sd: 0.15,
            },
            _ => Sampler::Uniform,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ShapeDatabase {
    pub family: Family,
    pub mapping: MappingSpec,
    pub seed: u64,
    pub designs: Vec<Vec<f64>>,
    /// N×D, one representation per row.
    pub phi: DMatrix<f64>,
}

impl ShapeDatabase {
    pub fn from_designs(
        family: Family,
        mapping: MappingSpec,
        seed: u64,
        designs: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if designs.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "a database needs at least 2 designs, got {}",
                designs.len()
            )));
        }
        let d = mapping.output_dim();
        let mut phi = DMatrix::zeros(designs.len(), d);
        for (i, x) in designs.iter().enumerate() {
            let row = mapping.apply(family, x)?;
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: row.len(),
                });
            }
            for (j, v) in row.into_iter().enumerate() {
                phi[(i, j)] = v;
            }
        }
        Ok(Self {
            family,
            mapping,
            seed,
            designs,
            phi,
        })
    }

    pub fn len(&self) -> usize {
        self.designs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.designs.is_empty()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut out = out;
        writeln!(
            out,
            "# problem={};N={};D={};seed={};mapping={}",
            self.family,
            self.len(),
            self.phi.ncols(),
            self.seed,
            serde_json::to_string(&self.mapping).map_err(|e| Error::Parse(e.to_string()))?
        )?;
        let mut w = csv::Writer::from_writer(out);
        let d = self.family.dim();
        let header: Vec<String> = (0..d)
            .map(|j| format!("design_{j}"))
            .chain((0..self.phi.ncols()).map(|j| format!("phi_{j}")))
            .collect();
        w.write_record(&header)?;
        for (i, x) in self.designs.iter().enumerate() {
            let rec: Vec<String> = x
                .iter()
                .copied()
                .chain(self.phi.row(i).iter().copied())
                .map(|v| format!("{v:e}"))
                .collect();
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut reader = BufReader::new(input);
        let mut first = String::new();
        reader.read_line(&mut first)?;
        let meta = first
            .trim()
            .strip_prefix('#')
            .ok_or_else(|| Error::Parse("missing database header comment".into()))?
            .trim();
        let (head, mapping) = meta
            .split_once(";mapping=")
            .ok_or_else(|| Error::Parse("header lacks a mapping".into()))?;
        let mapping: MappingSpec =
            serde_json::from_str(mapping).map_err(|e| Error::Parse(e.to_string()))?;
        let mut family = None;
        let mut n = None;
        let mut d = None;
        let mut seed = None;
        for kv in head.split(';') {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad header field '{kv}'")))?;
            let bad = |_| Error::Parse(format!("bad value for {k}"));
            match k {
                "problem" => family = Some(v.parse::<Family>()?),
                "N" => n = Some(v.parse::<usize>().map_err(bad)?),
                "D" => d = Some(v.parse::<usize>().map_err(bad)?),
                "seed" => seed = Some(v.parse::<u64>().map_err(bad)?),
                _ => return Err(Error::Parse(format!("unknown header field '{k}'"))),
            }
        }
        let (Some(family), Some(n), Some(d), Some(seed)) = (family, n, d, seed) else {
            return Err(Error::Parse("incomplete database header".into()));
        };
        let dim = family.dim();
        let mut r = csv::Reader::from_reader(reader);
        let mut designs = Vec::with_capacity(n);
        let mut phi = DMatrix::zeros(n, d);
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            if i >= n || rec.len() != dim + d {
                return Err(Error::Parse(format!("unexpected record {i}")));
            }
            let vals: Vec<f64> = rec
                .iter()
                .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Parse(e.to_string())))
                .collect::<Result<_>>()?;
            designs.push(vals[..dim].to_vec());
            for j in 0..d {
                phi[(i, j)] = vals[dim + j];
            }
        }
        if designs.len() != n {
            return Err(Error::Parse(format!("expected {n} rows, found {}", designs.len())));
        }
        Ok(Self {
            family,
            mapping,
            seed,
            designs,
            phi,
        })
    }
}

/// Draws `n` designs of `family` and maps them. Reproducible under `seed`.
pub fn build_database(
    family: Family,
    n: usize,
    sampler: &Sampler,
    mapping: MappingSpec,
    seed: u64,
) -> Result<ShapeDatabase> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "a database needs at least 2 designs, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let designs = match sampler {
        Sampler::Uniform => {
            let b = family.bounds();
            (0..n).map(|_| b.sample(&mut rng)).collect()
        }
        Sampler::GaussianPrior { lengthscale, sd } => {
            if family != Family::Catenoid {
                return Err(Error::Unsupported(format!(
                    "the Gaussian prior sampler only applies to the catenoid, not {family}"
                )));
            }
            sample_pinned_prior(family.dim(), *lengthscale, *sd, n, &mut rng)?
        }
    };
    ShapeDatabase::from_designs(family, mapping, seed, designs)
}

/// Squared-exponential process values at nodes j/(m+1), j = 1..m,
/// conditioned on zero at 0 and 1, kept only when inside the envelope.
fn sample_pinned_prior(
    m: usize,
    lengthscale: f64,
    sd: f64,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Vec<f64>>> {
    let t: Vec<f64> = (1..=m).map(|j| j as f64 / (m + 1) as f64).collect();
    let k = |a: f64, b: f64| sd * sd * (-(a - b) * (a - b) / (2.0 * lengthscale * lengthscale)).exp();
    let ends = [0.0, 1.0];
    let kee = nalgebra::Matrix2::from_fn(|i, j| k(ends[i], ends[j]));
    let kee_inv = kee
        .try_inverse()
        .ok_or_else(|| Error::Numerical("singular end-point covariance".into()))?;
    let cov = DMatrix::from_fn(m, m, |i, j| {
        let a = nalgebra::Vector2::new(k(t[i], 0.0), k(t[i], 1.0));
        let b = nalgebra::Vector2::new(k(t[j], 0.0), k(t[j], 1.0));
        k(t[i], t[j]) - a.dot(&(kee_inv * b))
    });
    let chol = cholesky_with_jitter(&cov, sd * sd)?;
    let l = chol.factor.l();
    let mut out = Vec::with_capacity(n);
    let mut attempts = 0usize;
    while out.len() < n {
        attempts += 1;
        if attempts > 1000 * n + 1000 {
            return Err(Error::Numerical("envelope rejection rate too high".into()));
        }
        let z = nalgebra::DVector::from_fn(m, |_, _| StandardNormal.sample(rng));
        let r = &l * z;
        let x: Vec<f64> = r.iter().copied().collect();
        if catenoid_in_envelope(&x) {
            out.push(x);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes::mapping::MappingKind;

    #[test]
    fn same_seed_same_database() {
        for f in [Family::Circle3, Family::Catenoid] {
            let map = MappingSpec::for_family(MappingKind::Contour, f);
            let s = Sampler::default_for(f);
            let a = build_database(f, 2, &s, map.clone(), 11).unwrap();
            let b = build_database(f, 2, &s, map, 11).unwrap();
            assert_eq!(a.phi, b.phi);
            assert_eq!(a.designs, b.designs);
        }
    }

    #[test]
    fn prior_sampler_is_catenoid_only() {
        let s = Sampler::default_for(Family::Catenoid);
        let map = MappingSpec::for_family(MappingKind::Contour, Family::Circle1);
        assert!(build_database(Family::Circle1, 3, &s, map, 0).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let map = MappingSpec::for_family(MappingKind::Contour, Family::Circle2);
        let db = build_database(Family::Circle2, 4, &Sampler::Uniform, map, 5).unwrap();
        let mut buf = Vec::new();
        db.write_csv(&mut buf).unwrap();
        let back = ShapeDatabase::read_csv(&buf[..]).unwrap();
        assert_eq!(back.family, db.family);
        assert_eq!(back.mapping, db.mapping);
        assert_eq!(back.seed, 5);
        assert_eq!(back.designs, db.designs);
        assert_eq!(back.phi, db.phi);
    }
}
