//! Fixed surfaces shared by the benchmarks.

use shtuka_core::moduli::{build_gamma0_deg4, FormConvention};
use shtuka_core::{Deg4Params, Deg4Shape, FiniteField, TriForm};

/// `4(0)` over F_3 at (P, Q) = (1, 2).
pub fn four_zero_q3() -> (FiniteField, TriForm) {
    let f = FiniteField::new(3, 1).expect("F_3");
    let params = Deg4Params {
        shape: Deg4Shape::FourZero,
        q: 3,
        p_val: f.from_int(1),
        q_val: f.from_int(2),
        r_val: None,
        convention: FormConvention::Kernel,
    };
    let tf = build_gamma0_deg4(&f, &params).expect("surface builds");
    (f, tf)
}

/// Squarefree level over F_9 at (P, Q) = (x+2, x).
pub fn squarefree_q3() -> (FiniteField, TriForm) {
    let f = FiniteField::new(3, 2).expect("F_9");
    let x = f.gen();
    let params = Deg4Params {
        shape: Deg4Shape::Squarefree,
        q: 3,
        p_val: f.add(x, f.from_int(2)),
        q_val: x,
        r_val: None,
        convention: FormConvention::Kernel,
    };
    let tf = build_gamma0_deg4(&f, &params).expect("surface builds");
    (f, tf)
}
