//! Trotter gates and the two-site update schemes.

mod evolve;
mod gate;
mod policy;
mod update;

pub use evolve::{
    tebd_step, trotter_schedule, trotter_schedule_bonds, BondParity, Evolvable, GateRecord, LayerGates,
    TrotterLayer, TrotterSchedule,
};
pub use gate::TwoSiteGate;
pub use policy::{Scheme, TruncationPolicy, TruncationReport};
pub use update::{
    apply_gate, apply_gate_eig, apply_gate_qr, apply_gate_qr_cbe, apply_gate_qr_cbe_with_width, apply_gate_svd,
    truncation_error_explicit, EvolvedBlock, LeftForm, TwoSiteUpdate,
};
