use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals;
use crate::grid::ScalarField;

/// Diagnostics of one solution snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassRecord {
    pub t: f64,
    pub mass: f64,
    pub max_u: f64,
    pub min_u: f64,
    pub l2_norm: f64,
    pub lk_norm: f64,
    /// Quadrature of `u^α`, the integrand of the mass ODE.
    pub int_u_alpha: f64,
    pub negativity_flag: bool,
}

impl MassRecord {
    pub fn measure(t: f64, u: &ScalarField, alpha: f64, lk_order: f64) -> Result<Self> {
        Ok(Self {
            t,
            mass: functionals::mass(u),
            max_u: u.max(),
            min_u: u.min(),
            l2_norm: functionals::lk_norm(u, 2.0)?,
            lk_norm: functionals::lk_norm(u, lk_order)?,
            int_u_alpha: functionals::integral_of_power(u, alpha),
            negativity_flag: u.min() < 0.0,
        })
    }

    fn is_finite(&self) -> bool {
        [
            self.t,
            self.mass,
            self.max_u,
            self.min_u,
            self.l2_norm,
            self.lk_norm,
            self.int_u_alpha,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

/// Time-ordered diagnostics of a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MassSeries {
    /// Order of the `lk_norm` column.
    pub lk_order: f64,
    records: Vec<MassRecord>,
}

impl MassSeries {
    pub fn new(lk_order: f64) -> Self {
        Self {
            lk_order,
            records: Vec::new(),
        }
    }

    pub fn push(&mut self, record: MassRecord) -> Result<()> {
        if !record.is_finite() {
            return Err(Error::InsufficientData(format!(
                "non-finite record at t = {}",
                record.t
            )));
        }
        if let Some(last) = self.records.last() {
            if record.t <= last.t {
                return Err(Error::InsufficientData(format!(
                    "record times must increase: {} after {}",
                    record.t, last.t
                )));
            }
        }
        self.records.push(record);
        Ok(())
    }

    pub fn records(&self) -> &[MassRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn first(&self) -> Option<&MassRecord> {
        self.records.first()
    }

    pub fn last(&self) -> Option<&MassRecord> {
        self.records.last()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.t)
    }
}
