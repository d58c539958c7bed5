//! Reference systems used by the CLI walkthrough and the test suites.

use crate::linalg::{build_theta, RealMatrix};
use crate::realizability::LtiSystem;

/// Four-state, two-input example with `r = 4` and `n_v = 6`.
pub fn reference_system() -> LtiSystem {
    let i2 = RealMatrix::identity(2, 2);
    let z2 = RealMatrix::zeros(2, 2);
    let mut a = RealMatrix::zeros(4, 4);
    a.view_mut((0, 0), (2, 2)).copy_from(&(&i2 * -1.3894));
    a.view_mut((0, 2), (2, 2)).copy_from(&(&i2 * -0.4472));
    a.view_mut((2, 0), (2, 2)).copy_from(&(&i2 * -0.2));
    a.view_mut((2, 2), (2, 2)).copy_from(&(&i2 * -0.25));
    let mut b = RealMatrix::zeros(4, 2);
    b.view_mut((0, 0), (2, 2)).copy_from(&(&i2 * -0.4472));
    b.view_mut((2, 0), (2, 2)).copy_from(&z2);
    let c = b.transpose();
    LtiSystem::new(a, b, c).expect("reference system is valid")
}

/// `S̃` for [`reference_system`] as published to four decimals.
pub fn reference_s_tilde() -> RealMatrix {
    RealMatrix::from_row_slice(
        4,
        4,
        &[
            0.0, 2.3788, 0.0, 0.6472, //
            -2.3788, 0.0, -0.6472, 0.0, //
            0.0, 0.6472, 0.0, 0.5, //
            -0.6472, 0.0, -0.5, 0.0,
        ],
    )
}

/// `A = J`, `B = C = 0`: already realizable, `S̃ = 0`.
pub fn trivial_system() -> LtiSystem {
    let j = build_theta(2).expect("size 2 is even");
    LtiSystem::new(j, RealMatrix::zeros(2, 2), RealMatrix::zeros(2, 2)).expect("valid")
}

/// `A = 0`, `B = C = I₂`: `S̃ = −2J`, `r = 2`.
pub fn small_system() -> LtiSystem {
    LtiSystem::new(
        RealMatrix::zeros(2, 2),
        RealMatrix::identity(2, 2),
        RealMatrix::identity(2, 2),
    )
    .expect("valid")
}
