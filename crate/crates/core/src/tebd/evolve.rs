use super::gate::TwoSiteGate;
use super::policy::{Scheme, TruncationPolicy, TruncationReport};
use super::update::{apply_gate, LeftForm};
use crate::error::{input_err, shape_err, Result};
use crate::linalg::ComplexTensor;
use crate::mps::{FiniteMps, UniformMps};

/// Which bonds a Trotter layer acts on. Bond `(m, m + 1)` is even when `m` is.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BondParity {
    Even,
    Odd,
}

impl BondParity {
    fn matches(self, m: usize) -> bool {
        m.is_multiple_of(2) == (self == BondParity::Even)
    }
}

#[derive(Clone, Debug)]
pub enum LayerGates {
    /// One gate for every bond (translation-invariant unit cell).
    Uniform(TwoSiteGate),
    /// Gate for the bond between sites `b` and `b + 1` at index `b`.
    PerBond(Vec<TwoSiteGate>),
}

#[derive(Clone, Debug)]
pub struct TrotterLayer {
    pub parity: BondParity,
    pub gates: LayerGates,
}

impl TrotterLayer {
    fn gate(&self, b: usize) -> Result<&TwoSiteGate> {
        match &self.gates {
            LayerGates::Uniform(g) => Ok(g),
            LayerGates::PerBond(gs) => gs
                .get(b)
                .ok_or_else(|| shape_err!("no gate for bond {b} ({} provided)", gs.len())),
        }
    }
}

pub type TrotterSchedule = Vec<TrotterLayer>;

/// Fractions of `dt` per layer for the supported Trotter orders.
fn splitting(order: u32) -> Result<&'static [(BondParity, f64)]> {
    match order {
        1 => Ok(&[(BondParity::Even, 1.0), (BondParity::Odd, 1.0)]),
        2 => Ok(&[(BondParity::Even, 0.5), (BondParity::Odd, 1.0), (BondParity::Even, 0.5)]),
        _ => Err(input_err!("unsupported Trotter order {order} (expected 1 or 2)")),
    }
}

/// Even/odd splitting of `exp(-i dt Σ h)` with a single bond Hamiltonian.
pub fn trotter_schedule(h_bond: &ComplexTensor, d: usize, dt: f64, order: u32) -> Result<TrotterSchedule> {
    splitting(order)?
        .iter()
        .map(|&(parity, f)| {
            Ok(TrotterLayer {
                parity,
                gates: LayerGates::Uniform(TwoSiteGate::from_hamiltonian(d, h_bond, f * dt)?),
            })
        })
        .collect()
}

/// As [`trotter_schedule`] with one Hamiltonian per bond of an open chain.
pub fn trotter_schedule_bonds(h_bonds: &[ComplexTensor], d: usize, dt: f64, order: u32) -> Result<TrotterSchedule> {
    splitting(order)?
        .iter()
        .map(|&(parity, f)| {
            let gates = h_bonds
                .iter()
                .enumerate()
                .map(|(b, h)| {
                    if parity.matches(b) {
                        TwoSiteGate::from_hamiltonian(d, h, f * dt)
                    } else {
                        Ok(TwoSiteGate::identity(d))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(TrotterLayer {
                parity,
                gates: LayerGates::PerBond(gates),
            })
        })
        .collect()
}

/// Truncation outcome of one gate, tagged with the bond it produced.
#[derive(Clone, Debug, PartialEq)]
pub struct GateRecord {
    /// Uniform: index `n` of the new `Ξ^[n]`. Finite: bond between the two sites.
    pub bond: usize,
    pub report: TruncationReport,
}

/// States that a Trotter schedule can be applied to.
pub trait Evolvable: Sized {
    fn apply_layer(
        &mut self,
        layer: &TrotterLayer,
        scheme: Scheme,
        policy: &TruncationPolicy,
        out: &mut Vec<GateRecord>,
    ) -> Result<()>;
}

impl Evolvable for UniformMps {
    fn apply_layer(
        &mut self,
        layer: &TrotterLayer,
        scheme: Scheme,
        policy: &TruncationPolicy,
        out: &mut Vec<GateRecord>,
    ) -> Result<()> {
        let cell = self.unit_cell_len();
        if !cell.is_multiple_of(2) {
            return Err(shape_err!("even/odd layers need an even unit cell, got L = {cell}"));
        }
        for m in (0..cell).filter(|&m| layer.parity.matches(m)) {
            let n = (m + 1) % cell;
            let upd = apply_gate(
                scheme,
                self.bond(m),
                self.site(m),
                self.site(n),
                layer.gate(m)?,
                policy,
                LeftForm::Hastings,
            )?;
            self.set_pair(m, upd.left, upd.bond, upd.right);
            out.push(GateRecord {
                bond: n,
                report: upd.report,
            });
        }
        Ok(())
    }
}

impl Evolvable for FiniteMps {
    fn apply_layer(
        &mut self,
        layer: &TrotterLayer,
        scheme: Scheme,
        policy: &TruncationPolicy,
        out: &mut Vec<GateRecord>,
    ) -> Result<()> {
        for b in (0..self.len().saturating_sub(1)).filter(|&b| layer.parity.matches(b)) {
            self.move_center_in_place(b)?;
            let upd = apply_gate(
                scheme,
                self.center_matrix(),
                self.site(b),
                self.site(b + 1),
                layer.gate(b)?,
                policy,
                LeftForm::Isometric,
            )?;
            self.set_pair(b, upd.left, upd.bond, upd.right);
            out.push(GateRecord {
                bond: b + 1,
                report: upd.report,
            });
        }
        Ok(())
    }
}

/// One Trotter step: every layer of `schedule` in order.
pub fn tebd_step<S: Evolvable + Clone>(
    state: &S,
    schedule: &[TrotterLayer],
    scheme: Scheme,
    policy: &TruncationPolicy,
) -> Result<(S, Vec<GateRecord>)> {
    policy.validate()?;
    let mut next = state.clone();
    let mut records = Vec::new();
    for layer in schedule {
        next.apply_layer(layer, scheme, policy, &mut records)?;
    }
    Ok((next, records))
}
