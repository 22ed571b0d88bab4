//! Frobenius-like structure: canonical isomorphism, period map, potentials,
//! and restriction to strata.

mod canonical;
mod periods;
mod potential;
mod sing;
mod strata;

pub use canonical::{
    alpha_of_function, canonical_iso_analytic, canonical_iso_combinatorial, isometry_defect,
    naive_iso_and_constant, CanonicalIso, IsoMode, MeasuredConstant,
};
pub use periods::{
    dual_pairing_drift, flat_and_twisted_periods, flat_period_check, twisted_closedness_k1,
    twisted_period_check, PeriodCheck, PeriodReport,
};
pub use potential::{
    a_constant, eta_and_beta, kernel_relation_defect, multi_identity, period_map,
    period_map_jacobian, plucker_identities, potential_first, potential_first_closed_form,
    potential_first_poly, potential_identity_rhs, potential_report, potential_second_derivative,
    EtaValues, PotentialReport, PotentialRow,
};
pub use sing::{
    check_dual_product_points, check_period_identity, check_sing_product_points,
    contravariant_compositions, contravariant_map_class, induced_multiplication_on_sing,
    CompositionSigns,
};
pub use strata::{strata_restriction_k1, stratum_family, StratumCheck, StratumReport};
