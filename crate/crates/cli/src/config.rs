//! Run configuration: one TOML schema with a section per command.

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use a2_building::arith::{parse_scalar, Matrix, Prime, Scalar};
use a2_building::building::Vertex;
use a2_building::dynamics::MeasureSpec;
use a2_building::isometry::GroupElement;

pub const SCHEMA_VERSION: u32 = 1;

pub type MatrixRows = Vec<Vec<String>>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub prime: u64,
    #[serde(default)]
    pub seed: u64,
    pub workers: Option<usize>,
    /// Output directory; `--out` wins.
    pub out: Option<String>,
    /// Basis of the basepoint lattice o; the standard lattice when absent.
    pub basepoint: Option<MatrixRows>,
    #[serde(default)]
    pub measure: MeasureConfig,
    #[serde(default)]
    pub classify: ClassifyConfig,
    #[serde(default)]
    pub proportion: ProportionConfig,
    #[serde(default)]
    pub drift: DriftConfig,
    #[serde(default)]
    pub converge: ConvergeConfig,
    #[serde(default)]
    pub opposite: OppositeConfig,
    #[serde(default)]
    pub pair: PairConfig,
    #[serde(default)]
    pub free_cert: FreeCertConfig,
    #[serde(default)]
    pub fixed_point: FixedPointConfig,
    #[serde(default)]
    pub boundary: BoundaryConfig,
}

/// Either a named preset or an explicit support with optional weights
/// (uniform when omitted).
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureConfig {
    pub preset: Option<String>,
    pub generators: Option<Vec<MatrixRows>>,
    pub weights: Option<Vec<String>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyConfig {
    #[serde(default)]
    pub elements: Vec<MatrixRows>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProportionConfig {
    pub n_grid: Vec<usize>,
    pub trials: usize,
}

impl Default for ProportionConfig {
    fn default() -> Self {
        ProportionConfig {
            n_grid: vec![10, 25, 50, 100],
            trials: 500,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DriftConfig {
    pub n: usize,
    pub trials: usize,
}

impl Default for DriftConfig {
    fn default() -> Self {
        DriftConfig {
            n: 100,
            trials: 200,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergeConfig {
    /// Stabilization is counted at step n.
    pub n: usize,
    pub trials: usize,
    /// Horizon through which the germ must stay constant; defaults to 2n.
    pub horizon: Option<usize>,
}

impl Default for ConvergeConfig {
    fn default() -> Self {
        ConvergeConfig {
            n: 100,
            trials: 500,
            horizon: None,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OppositeConfig {
    pub n: usize,
    pub trials: usize,
}

impl Default for OppositeConfig {
    fn default() -> Self {
        OppositeConfig {
            n: 100,
            trials: 500,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PairConfig {
    pub budget: usize,
    pub precision: u32,
}

impl Default for PairConfig {
    fn default() -> Self {
        PairConfig {
            budget: 200,
            precision: 32,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FreeCertConfig {
    pub g1: Option<MatrixRows>,
    pub g2: Option<MatrixRows>,
    /// Generator exponent N; the certified minimum when omitted.
    pub power: Option<u64>,
    pub depth: usize,
    pub margin: i64,
    pub precision: u32,
    /// Random flags per cylinder for the Monte Carlo falsifier; 0 skips it.
    pub falsifier_samples: usize,
}

impl Default for FreeCertConfig {
    fn default() -> Self {
        FreeCertConfig {
            g1: None,
            g2: None,
            power: None,
            depth: 8,
            margin: 1,
            precision: 32,
            falsifier_samples: 0,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FixedPointConfig {
    pub generators: Vec<MatrixRows>,
    pub radius: Option<usize>,
    pub word_depth: usize,
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        FixedPointConfig {
            generators: Vec::new(),
            radius: None,
            word_depth: 2,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundaryConfig {
    pub n: usize,
    pub trials: usize,
    pub depth: i64,
}

impl Default for BoundaryConfig {
    fn default() -> Self {
        BoundaryConfig {
            n: 100,
            trials: 500,
            depth: 1,
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).context("invalid config")?;
        if cfg.schema_version != SCHEMA_VERSION {
            bail!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                cfg.schema_version
            );
        }
        Ok(cfg)
    }

    pub fn prime(&self) -> Result<Prime> {
        Prime::new(self.prime).with_context(|| format!("prime = {}", self.prime))
    }

    pub fn basepoint(&self) -> Result<Vertex> {
        let p = self.prime()?;
        match &self.basepoint {
            None => Ok(Vertex::standard(p)),
            Some(rows) => {
                let m = Matrix::parse_rows(rows).context("basepoint: bad matrix")?;
                Vertex::new(&m, p).context("basepoint: not an invertible 3×3 matrix")
            }
        }
    }

    pub fn element(&self, rows: &MatrixRows, what: &str) -> Result<GroupElement> {
        let m = Matrix::parse_rows(rows).with_context(|| format!("{what}: bad matrix"))?;
        GroupElement::new(m, self.prime()?)
            .with_context(|| format!("{what}: not an invertible 3×3 matrix"))
    }

    pub fn measure(&self) -> Result<MeasureSpec> {
        let p = self.prime()?;
        let m = &self.measure;
        match (&m.preset, &m.generators) {
            (Some(_), Some(_)) => bail!("measure: give either preset or generators, not both"),
            (Some(name), None) if name == "sl3_elementary" => {
                if m.weights.is_some() {
                    bail!("measure: weights are fixed by the preset");
                }
                Ok(MeasureSpec::sl3_elementary(p))
            }
            (Some(name), None) => bail!("measure: unknown preset {name:?}"),
            (None, None) => Ok(MeasureSpec::sl3_elementary(p)),
            (None, Some(gens)) => {
                let elements = gens
                    .iter()
                    .enumerate()
                    .map(|(i, g)| self.element(g, &format!("measure.generators[{i}]")))
                    .collect::<Result<Vec<_>>>()?;
                let spec = match &m.weights {
                    None => MeasureSpec::uniform(elements),
                    Some(ws) => {
                        if ws.len() != elements.len() {
                            bail!(
                                "measure: {} weights for {} generators",
                                ws.len(),
                                elements.len()
                            );
                        }
                        let ws = ws
                            .iter()
                            .map(|w| parse_scalar(w))
                            .collect::<Result<Vec<Scalar>, _>>()?;
                        MeasureSpec::new(elements.into_iter().zip(ws).collect())
                    }
                };
                Ok(spec?)
            }
        }
    }
}

pub fn positive(value: usize, name: &str) -> Result<()> {
    if value == 0 {
        bail!("{name} must be positive");
    }
    Ok(())
}
