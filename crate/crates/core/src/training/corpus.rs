use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::exec;
use crate::hermite::HermiteBasis;
use crate::training::labeling::{gamma_grid, minimizing_hermite_function};
use crate::training::spline::{spline_from_rng, CubicSpline};
use crate::transform::{pv_to_fc, NodalFunction};

/// Splines whose largest break value is below this are redrawn.
pub const DEGENERATE_SPLINE_MAX: f64 = 1e-12;
const MAX_REDRAWS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Representation {
    #[serde(rename = "PV", alias = "pv")]
    Pv,
    #[serde(rename = "FC", alias = "fc")]
    Fc,
}

impl Representation {
    pub fn label(self) -> &'static str {
        match self {
            Representation::Pv => "PV",
            Representation::Fc => "FC",
        }
    }
}

impl std::str::FromStr for Representation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "PV" => Ok(Representation::Pv),
            "FC" => Ok(Representation::Fc),
            _ => Err(Error::InvalidArgument(format!("unknown representation `{s}` (expected PV or FC)"))),
        }
    }
}

impl std::fmt::Display for Representation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSample {
    pub features: Vec<f64>,
    pub target_alpha: f64,
    pub representation: Representation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub seed: u64,
    pub representation: Representation,
    pub samples: Vec<TrainingSample>,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn features(&self) -> Vec<Vec<f64>> {
        self.samples.iter().map(|s| s.features.clone()).collect()
    }

    pub fn targets(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.target_alpha).collect()
    }
}

/// The same members featurized both ways.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusPair {
    pub pv: Corpus,
    pub fc: Corpus,
}

impl CorpusPair {
    pub fn get(&self, repr: Representation) -> &Corpus {
        match repr {
            Representation::Pv => &self.pv,
            Representation::Fc => &self.fc,
        }
    }
}

/// Fourier coefficients at α = 1 of a profile known at the nodes:
/// `pv_to_fc` of `u(ξ_j) e^{ξ_j²}`.
pub fn fc_features(basis: &HermiteBasis, u_at_nodes: &[f64]) -> Result<Vec<f64>> {
    check_len(basis.n(), u_at_nodes.len())?;
    let values = u_at_nodes
        .iter()
        .zip(basis.nodes())
        .map(|(u, x)| u * (x * x).exp())
        .collect();
    Ok(pv_to_fc(basis, &NodalFunction { alpha: 1.0, values })?.coeffs)
}

fn uniform(rng: &mut impl Rng, range: (f64, f64)) -> f64 {
    range.0 + (range.1 - range.0) * rng.gen::<f64>()
}

/// Scaled Gaussians `H e^{−a²x²}` with `(a, H)` uniform in the given ranges,
/// labeled by `a`.
pub fn gen_gaussian_samples(
    basis: &HermiteBasis,
    count: usize,
    a_range: (f64, f64),
    h_range: (f64, f64),
    rng_seed: u64,
) -> Result<CorpusPair> {
    if !(a_range.0 > 0.0 && a_range.0 <= a_range.1) {
        return Err(Error::InvalidArgument(format!("invalid width range {a_range:?}")));
    }
    if h_range.0 > h_range.1 {
        return Err(Error::InvalidArgument(format!("invalid height range {h_range:?}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let params: Vec<(f64, f64)> = (0..count)
        .map(|_| {
            let a = uniform(&mut rng, a_range);
            let h = uniform(&mut rng, h_range);
            (a, h)
        })
        .collect();
    let mut pv = Vec::with_capacity(count);
    let mut fc = Vec::with_capacity(count);
    for (a, h) in params {
        let (p, f) = gaussian_sample(basis, a, h)?;
        pv.push(p);
        fc.push(f);
    }
    Ok(CorpusPair {
        pv: Corpus {
            seed: rng_seed,
            representation: Representation::Pv,
            samples: pv,
        },
        fc: Corpus {
            seed: rng_seed,
            representation: Representation::Fc,
            samples: fc,
        },
    })
}

/// PV and FC samples of `h e^{−a²x²}`.
pub fn gaussian_sample(basis: &HermiteBasis, a: f64, h: f64) -> Result<(TrainingSample, TrainingSample)> {
    let u: Vec<f64> = basis.nodes().iter().map(|&x| h * (-a * a * x * x).exp()).collect();
    let fc = fc_features(basis, &u)?;
    Ok((
        TrainingSample {
            features: u,
            target_alpha: a,
            representation: Representation::Pv,
        },
        TrainingSample {
            features: fc,
            target_alpha: a,
            representation: Representation::Fc,
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplineCorpusParams {
    pub k: usize,
    pub m_interior: usize,
    pub c: f64,
    pub value_cap: f64,
    pub alpha_interval: (f64, f64),
}

impl Default for SplineCorpusParams {
    fn default() -> Self {
        Self {
            k: 40,
            m_interior: 5,
            c: 4.5,
            value_cap: 1.0,
            alpha_interval: (0.5, 1.5),
        }
    }
}

/// One labeled spline: its draw, the label and both feature vectors.
#[derive(Debug, Clone)]
pub struct SplineMember {
    pub spline: CubicSpline,
    pub alpha: f64,
    pub gamma_min: f64,
    pub pv: TrainingSample,
    pub fc: TrainingSample,
}

/// Member `index` of a seeded spline corpus. Each member owns the ChaCha
/// stream `index` of the corpus seed, so members are independent of
/// evaluation order.
pub fn spline_member(
    basis: &HermiteBasis,
    params: &SplineCorpusParams,
    rng_seed: u64,
    index: u64,
    fine_grid: &[f64],
) -> Result<SplineMember> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    rng.set_stream(index);
    let mut spline = spline_from_rng(&mut rng, params.c, params.m_interior, params.value_cap)?;
    let mut redraws = 0;
    while spline.max_value() < DEGENERATE_SPLINE_MAX {
        redraws += 1;
        if redraws > MAX_REDRAWS {
            return Err(Error::InvalidArgument("spline draws are all degenerate; check the value cap".into()));
        }
        spline = spline_from_rng(&mut rng, params.c, params.m_interior, params.value_cap)?;
    }
    let label = minimizing_hermite_function(basis, |x| spline.eval(x), params.alpha_interval, fine_grid);
    let a2 = label.alpha * label.alpha;
    let g_nodes: Vec<f64> = label
        .p_tilde_at_nodes
        .iter()
        .zip(basis.nodes())
        .map(|(p, x)| p * (-a2 * x * x).exp())
        .collect();
    let fc = fc_features(basis, &g_nodes)?;
    let pv = basis.nodes().iter().map(|&x| spline.eval(x)).collect();
    Ok(SplineMember {
        spline,
        alpha: label.alpha,
        gamma_min: label.gamma_min,
        pv: TrainingSample {
            features: pv,
            target_alpha: label.alpha,
            representation: Representation::Pv,
        },
        fc: TrainingSample {
            features: fc,
            target_alpha: label.alpha,
            representation: Representation::Fc,
        },
    })
}

/// `k` random clamped splines labeled by their minimizing Hermite function.
pub fn build_spline_corpus(basis: &HermiteBasis, params: &SplineCorpusParams, rng_seed: u64) -> Result<CorpusPair> {
    let grid = gamma_grid();
    let indices: Vec<u64> = (0..params.k as u64).collect();
    let members = exec::map(&indices, |&i| spline_member(basis, params, rng_seed, i, &grid));
    let mut pv = Vec::with_capacity(params.k);
    let mut fc = Vec::with_capacity(params.k);
    for m in members {
        let m = m?;
        pv.push(m.pv);
        fc.push(m.fc);
    }
    Ok(CorpusPair {
        pv: Corpus {
            seed: rng_seed,
            representation: Representation::Pv,
            samples: pv,
        },
        fc: Corpus {
            seed: rng_seed,
            representation: Representation::Fc,
            samples: fc,
        },
    })
}

pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `sample_id,representation,target_alpha,f_1..f_N` with a leading
/// `# seed=` comment line.
pub fn write_corpus(path: &Path, corpus: &Corpus) -> Result<()> {
    let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
    writeln!(file, "# seed={}", corpus.seed).map_err(|e| Error::io(path, e))?;
    let n = corpus.samples.first().map_or(0, |s| s.features.len());
    let mut w = csv::Writer::from_writer(file);
    let mut header = vec!["sample_id".to_string(), "representation".into(), "target_alpha".into()];
    header.extend((1..=n).map(|i| format!("f_{i}")));
    w.write_record(&header).map_err(|e| Error::parse(path, e))?;
    for (i, s) in corpus.samples.iter().enumerate() {
        let mut row = vec![i.to_string(), s.representation.label().to_string(), fmt_f64(s.target_alpha)];
        row.extend(s.features.iter().map(|v| fmt_f64(*v)));
        w.write_record(&row).map_err(|e| Error::parse(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_corpus(path: &Path) -> Result<Corpus> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let mut first = String::new();
    reader.read_line(&mut first).map_err(|e| Error::io(path, e))?;
    let seed = first
        .trim()
        .strip_prefix("# seed=")
        .and_then(|s| s.parse::<u64>().ok())
        .ok_or_else(|| Error::parse(path, "missing `# seed=` line"))?;
    let mut r = csv::Reader::from_reader(reader);
    let mut samples = Vec::new();
    let mut repr = None;
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::parse(path, e))?;
        if rec.len() < 3 {
            return Err(Error::parse(path, "row has fewer than three columns"));
        }
        let representation: Representation = rec[1].parse().map_err(|e: Error| Error::parse(path, e))?;
        if *repr.get_or_insert(representation) != representation {
            return Err(Error::parse(path, "mixed representations in one corpus"));
        }
        let num = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::parse(path, e));
        let target_alpha = num(&rec[2])?;
        let features = rec.iter().skip(3).map(num).collect::<Result<Vec<_>>>()?;
        samples.push(TrainingSample {
            features,
            target_alpha,
            representation,
        });
    }
    Ok(Corpus {
        seed,
        representation: repr.unwrap_or(Representation::Pv),
        samples,
    })
}
