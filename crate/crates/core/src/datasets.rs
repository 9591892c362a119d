//! Synthetic benchmark datasets: truth models, noise injection, CSV IO.
//!
//! The noise generator is pinned in-repo for bit-reproducibility: a
//! ChaCha8 stream seeded from the user seed, mapped to standard normals by
//! the Box-Muller transform. Two 64-bit draws produce one normal deviate.

use std::fmt::Display;
use std::path::Path as FsPath;
use std::str::FromStr;

use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::float::Float;
use crate::hyperelastic::{
    kinematics, model_stress, Dataset, HyperelasticLibrary, LoadCase, MaterialParams,
};

/// Benchmark truth models with their published parameter values.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TruthModel {
    /// `40 (I1 - 3)`
    NeoHookean,
    /// `40 (I1 - 3) + 20 (I2 - 3)`
    MooneyRivlin,
    /// `40 (I1 - 3) + 10 (I1 - 3)^2 + 30 (I1 - 3)^3`
    Yeoh,
    /// `40 (I1 - 3) + 20 (I2 - 3) + 10 (I1 - 3)^2 + 30 (I1 - 3)^3`
    Biderman,
    /// `5 (l1^8 + l2^8 + l3^8 - 3)`
    Ogden,
    /// Mooney-Rivlin plus the Ogden term.
    Mixed,
}

pub const ALL_TRUTH_MODELS: [TruthModel; 6] = [
    TruthModel::NeoHookean,
    TruthModel::MooneyRivlin,
    TruthModel::Yeoh,
    TruthModel::Biderman,
    TruthModel::Ogden,
    TruthModel::Mixed,
];

impl TruthModel {
    /// Kebab-case name used by the CLI.
    pub fn name(&self) -> &'static str {
        match self {
            TruthModel::NeoHookean => "neo-hookean",
            TruthModel::MooneyRivlin => "mooney-rivlin",
            TruthModel::Yeoh => "yeoh",
            TruthModel::Biderman => "biderman",
            TruthModel::Ogden => "ogden",
            TruthModel::Mixed => "mixed",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        ALL_TRUTH_MODELS.iter().copied().find(|m| m.name() == name)
    }

    /// Whether the model contains the Ogden term.
    pub fn is_nonlinear(&self) -> bool {
        matches!(self, TruthModel::Ogden | TruthModel::Mixed)
    }

    /// Truth parameters expressed in an order-4 library (with the Ogden pair
    /// appended for the nonlinear models).
    pub fn params<F: Float>(&self) -> MaterialParams<F> {
        let library = HyperelasticLibrary::new(4, self.is_nonlinear());
        let mut p = MaterialParams::zeros(&library);
        // Canonical index: C10 = 0, C01 = 1, C20 = 2, C30 = 5.
        match self {
            TruthModel::NeoHookean => {
                p.mooney[0] = F::cast(40);
            }
            TruthModel::MooneyRivlin => {
                p.mooney[0] = F::cast(40);
                p.mooney[1] = F::cast(20);
            }
            TruthModel::Yeoh => {
                p.mooney[0] = F::cast(40);
                p.mooney[2] = F::cast(10);
                p.mooney[5] = F::cast(30);
            }
            TruthModel::Biderman => {
                p.mooney[0] = F::cast(40);
                p.mooney[1] = F::cast(20);
                p.mooney[2] = F::cast(10);
                p.mooney[5] = F::cast(30);
            }
            TruthModel::Ogden => {
                p.ogden = Some((F::cast(5), F::cast(8)));
            }
            TruthModel::Mixed => {
                p.mooney[0] = F::cast(40);
                p.mooney[1] = F::cast(20);
                p.ogden = Some((F::cast(5), F::cast(8)));
            }
        }
        p
    }
}

/// Sample counts for the fixed control ranges: `F11` in `[0.75, 1.5]` and
/// `F12` in `[0, 0.5]`, endpoints inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SamplingGrid {
    pub n_utc: usize,
    pub n_ss: usize,
}

pub const UTC_RANGE: (f64, f64) = (0.75, 1.5);
pub const SS_RANGE: (f64, f64) = (0.0, 0.5);

impl SamplingGrid {
    pub fn new(n_utc: usize, n_ss: usize) -> Result<Self> {
        if n_utc + n_ss == 0 {
            return Err(Error::EmptyDataset);
        }
        Ok(SamplingGrid { n_utc, n_ss })
    }
}

impl Default for SamplingGrid {
    fn default() -> Self {
        SamplingGrid { n_utc: 50, n_ss: 50 }
    }
}

fn linspace<F: Float>(range: (f64, f64), n: usize) -> Vec<F> {
    match n {
        0 => Vec::new(),
        1 => vec![F::cast(range.0)],
        _ => (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                F::cast(range.0 + t * (range.1 - range.0))
            })
            .collect(),
    }
}

/// Evaluates the truth model's closed-form stresses on the sampling grid.
pub fn generate_truth<F: Float>(model: TruthModel, grid: &SamplingGrid) -> Dataset<F> {
    let params = model.params::<F>();
    let utc = linspace(UTC_RANGE, grid.n_utc)
        .into_iter()
        .map(|f11| {
            let state = kinematics(LoadCase::Utc, f11).expect("grid stretch is positive");
            (f11, model_stress(&params, &state).expect("closed form"))
        })
        .collect();
    let ss = linspace(SS_RANGE, grid.n_ss)
        .into_iter()
        .map(|f12| {
            let state = kinematics(LoadCase::Ss, f12).expect("shear state");
            (f12, model_stress(&params, &state).expect("closed form"))
        })
        .collect();
    Dataset::new(utc, ss).expect("grid has at least one sample")
}

/// Seeded standard-normal stream: ChaCha8 + Box-Muller.
pub(crate) struct NormalStream {
    rng: rand_chacha::ChaCha8Rng,
}

impl NormalStream {
    pub fn new(seed: u64) -> Self {
        NormalStream {
            rng: rand_chacha::ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn uniform(&mut self) -> f64 {
        // 53 mantissa bits; shifted into (0, 1] so the log below is finite.
        ((self.rng.next_u64() >> 11) + 1) as f64 * 2f64.powi(-53)
    }

    pub fn next_normal(&mut self) -> f64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}

/// Perturbs every stress by independent `N(0, sigma)` noise from the pinned
/// generator and recomputes the stress normalizers.
///
/// `sigma = 0` returns the dataset unchanged, bit for bit; a fixed seed
/// reproduces the same output on every platform.
pub fn add_noise<F: Float>(dataset: &Dataset<F>, sigma: F, seed: u64) -> Dataset<F> {
    if sigma == F::zero() {
        return dataset.clone();
    }
    let mut stream = NormalStream::new(seed);
    let mut perturb = |samples: &[(F, F)]| -> Vec<(F, F)> {
        samples
            .iter()
            .map(|&(c, p)| (c, p + sigma * F::cast(stream.next_normal())))
            .collect()
    };
    let utc = perturb(dataset.utc());
    let ss = perturb(dataset.ss());
    Dataset::new(utc, ss).expect("noise preserves sample counts")
}

/// Writes a dataset as CSV: header `load_case,control,stress`, UTC rows
/// first, then SS rows. Values print in shortest round-trip form.
pub fn write_csv<F: Float + Display>(dataset: &Dataset<F>, path: impl AsRef<FsPath>) -> Result<()> {
    let mut out = String::from("load_case,control,stress\n");
    for &(c, p) in dataset.utc() {
        out.push_str(&format!("UTC,{c},{p}\n"));
    }
    for &(c, p) in dataset.ss() {
        out.push_str(&format!("SS,{c},{p}\n"));
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Reads a dataset written by [`write_csv`].
pub fn read_csv<F: Float + FromStr>(path: impl AsRef<FsPath>) -> Result<Dataset<F>> {
    let text = std::fs::read_to_string(path)?;
    parse_csv(&text)
}

/// Parses the CSV dataset format from a string.
pub fn parse_csv<F: Float + FromStr>(text: &str) -> Result<Dataset<F>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "load_case,control,stress" => {}
        Some((_, header)) => {
            return Err(Error::Parse {
                line: 1,
                reason: format!("bad header {header:?}"),
            })
        }
        None => {
            return Err(Error::Parse {
                line: 1,
                reason: "empty file".to_string(),
            })
        }
    }
    let mut utc = Vec::new();
    let mut ss = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: line_no,
                reason: format!("expected 3 fields, got {}", fields.len()),
            });
        }
        let parse_num = |s: &str| {
            s.trim().parse::<F>().map_err(|_| Error::Parse {
                line: line_no,
                reason: format!("bad number {s:?}"),
            })
        };
        let control = parse_num(fields[1])?;
        let stress = parse_num(fields[2])?;
        match fields[0].trim() {
            "UTC" => utc.push((control, stress)),
            "SS" => ss.push((control, stress)),
            other => {
                return Err(Error::Parse {
                    line: line_no,
                    reason: format!("unknown load case {other:?}"),
                })
            }
        }
    }
    Dataset::new(utc, ss)
}
