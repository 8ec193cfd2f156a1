//! JSON file formats. Complex entries are `[re, im]` pairs, matrices are
//! lists of rows.
//!
//! Channel: `{"dim_in", "dim_out", "kraus": [matrix, ...]}` or
//! `{"dim_in", "dim_out", "choi": matrix}`.
//! Superchannel: `{"dims_in": [a, b], "dims_out": [a, b], "kraus": [...], "subnormalized": bool}`.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{ChoiDiagnostics, ChoiMatrix, QuantumChannel};
use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::superchannel::Superchannel;

pub type MatrixJson = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_json(m: &ComplexMatrix) -> MatrixJson {
    (0..m.rows()).map(|r| m.row(r).iter().map(|z| [z.re, z.im]).collect()).collect()
}

pub fn matrix_from_json(rows: &MatrixJson) -> Result<ComplexMatrix> {
    let n_rows = rows.len();
    let n_cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != n_cols) {
        return Err(Error::InvalidInput("matrix rows have different lengths".into()));
    }
    let data = rows.iter().flatten().map(|&[re, im]| Complex64::new(re, im)).collect();
    ComplexMatrix::new(n_rows, n_cols, data)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelJson {
    pub dim_in: usize,
    pub dim_out: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kraus: Option<Vec<MatrixJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub choi: Option<MatrixJson>,
}

/// A parsed channel file before validation. Choi files may hold operators
/// that are not channels, which `validate` needs to report on.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelSpec {
    Kraus { dim_in: usize, dim_out: usize, kraus: Vec<ComplexMatrix> },
    Choi { dim_in: usize, dim_out: usize, choi: ComplexMatrix },
}

impl ChannelSpec {
    pub fn from_json(json: &ChannelJson) -> Result<Self> {
        match (&json.kraus, &json.choi) {
            (Some(kraus), None) => {
                let kraus = kraus.iter().map(matrix_from_json).collect::<Result<Vec<_>>>()?;
                if kraus.iter().any(|k| k.shape() != (json.dim_out, json.dim_in)) {
                    return Err(Error::DimensionMismatch(format!(
                        "Kraus operators must be {}x{}",
                        json.dim_out, json.dim_in
                    )));
                }
                Ok(ChannelSpec::Kraus { dim_in: json.dim_in, dim_out: json.dim_out, kraus })
            }
            (None, Some(choi)) => {
                let choi = matrix_from_json(choi)?;
                let n = json.dim_in * json.dim_out;
                if choi.shape() != (n, n) {
                    return Err(Error::DimensionMismatch(format!("Choi matrix must be {n}x{n}")));
                }
                Ok(ChannelSpec::Choi { dim_in: json.dim_in, dim_out: json.dim_out, choi })
            }
            _ => Err(Error::InvalidInput("exactly one of \"kraus\" and \"choi\" must be present".into())),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        match self {
            ChannelSpec::Kraus { dim_in, dim_out, .. } | ChannelSpec::Choi { dim_in, dim_out, .. } => {
                (*dim_in, *dim_out)
            }
        }
    }

    /// Choi matrix of the described map, valid or not.
    pub fn choi_matrix(&self) -> ComplexMatrix {
        match self {
            ChannelSpec::Kraus { dim_in, dim_out, kraus } => {
                let n = dim_in * dim_out;
                let mut j = ComplexMatrix::zeros(n, n);
                for k in kraus {
                    // column (j, alpha) of J's square root: K[alpha][j]
                    let v: Vec<Complex64> = (0..*dim_in).flat_map(|a| (0..*dim_out).map(move |b| k[(b, a)])).collect();
                    j.add_assign_scaled(&ComplexMatrix::outer(&v), 1.0);
                }
                j
            }
            ChannelSpec::Choi { choi, .. } => choi.clone(),
        }
    }

    pub fn diagnostics(&self) -> ChoiDiagnostics {
        let (a, b) = self.dims();
        ChoiDiagnostics::of(a, b, &self.choi_matrix())
    }

    pub fn into_channel(self) -> Result<QuantumChannel> {
        match self {
            ChannelSpec::Kraus { kraus, .. } => QuantumChannel::from_kraus(kraus),
            ChannelSpec::Choi { dim_in, dim_out, choi } => ChoiMatrix::new(dim_in, dim_out, choi)?.to_channel(),
        }
    }
}

pub fn channel_to_json(phi: &QuantumChannel) -> ChannelJson {
    ChannelJson {
        dim_in: phi.dim_in(),
        dim_out: phi.dim_out(),
        kraus: Some(phi.kraus().iter().map(matrix_to_json).collect()),
        choi: None,
    }
}

pub fn choi_to_json(dim_in: usize, dim_out: usize, choi: &ComplexMatrix) -> ChannelJson {
    ChannelJson { dim_in, dim_out, kraus: None, choi: Some(matrix_to_json(choi)) }
}

pub fn parse_channel_spec(text: &str) -> Result<ChannelSpec> {
    ChannelSpec::from_json(&serde_json::from_str(text)?)
}

pub fn parse_channel(text: &str) -> Result<QuantumChannel> {
    parse_channel_spec(text)?.into_channel()
}

pub fn read_channel_spec(path: &Path) -> Result<ChannelSpec> {
    parse_channel_spec(&fs::read_to_string(path)?)
}

pub fn read_channel(path: &Path) -> Result<QuantumChannel> {
    read_channel_spec(path)?.into_channel()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuperchannelJson {
    pub dims_in: [usize; 2],
    pub dims_out: [usize; 2],
    pub kraus: Vec<MatrixJson>,
    #[serde(default)]
    pub subnormalized: bool,
}

pub fn superchannel_to_json(theta: &Superchannel) -> SuperchannelJson {
    let (a, b) = theta.dims_in();
    let (a2, b2) = theta.dims_out();
    SuperchannelJson {
        dims_in: [a, b],
        dims_out: [a2, b2],
        kraus: theta.kraus().iter().map(matrix_to_json).collect(),
        subnormalized: theta.is_subnormalized(),
    }
}

pub fn superchannel_from_json(json: &SuperchannelJson) -> Result<Superchannel> {
    let kraus = json.kraus.iter().map(matrix_from_json).collect::<Result<Vec<_>>>()?;
    let dims_in = (json.dims_in[0], json.dims_in[1]);
    let dims_out = (json.dims_out[0], json.dims_out[1]);
    if json.subnormalized {
        Superchannel::subnormalized(kraus, dims_in, dims_out)
    } else {
        Superchannel::from_kraus(kraus, dims_in, dims_out)
    }
}

pub fn parse_superchannel(text: &str) -> Result<Superchannel> {
    superchannel_from_json(&serde_json::from_str(text)?)
}

pub fn read_superchannel(path: &Path) -> Result<Superchannel> {
    parse_superchannel(&fs::read_to_string(path)?)
}
