//! Independent reference computations shared by the integration tests.
//!
//! Nothing here calls the solver: the fixed points are obtained from small
//! dense linear systems written out from the Bellman equations by hand.

#![allow(dead_code)]

/// Gaussian elimination with partial pivoting on a small dense system.
pub fn solve_dense<const N: usize>(mut a: [[f64; N]; N], mut b: [f64; N]) -> [f64; N] {
    for col in 0..N {
        let pivot = (col..N)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..N {
            let f = a[row][col] / a[col][col];
            let pivot_row = a[col];
            for (x, p) in a[row][col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= f * p;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; N];
    for row in (0..N).rev() {
        let s: f64 = (row + 1..N).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Reward-to-go when everyone plays `herd` (+1 or -1) forever and the
/// continuation stays in the same herding regime: `(V(-1), V(+1))`.
///
/// With `a = herd`, `mu1 = (1 + a) / 2`:
///   V(x) = R(x, a) + delta * [ (1 - f_x) V(x) + f_x V(-x) ]
/// where `f_x` is the flip probability of type `x` under action `a`.
pub fn herding_values(p1: f64, p2: f64, alpha: f64, delta: f64, herd: f64) -> (f64, f64) {
    let mu1 = (1.0 + herd) / 2.0;
    let r = |x: f64| alpha * x * herd + (1.0 - alpha) * herd * (2.0 * mu1 - 1.0);
    let flip = |x: f64| if x == herd { p1 } else { p2 };
    // unknowns [V(-1), V(+1)]
    let fm = flip(-1.0);
    let fp = flip(1.0);
    let a = [
        [1.0 - delta * (1.0 - fm), -delta * fm],
        [-delta * fp, 1.0 - delta * (1.0 - fp)],
    ];
    let v = solve_dense(a, [r(-1.0), r(1.0)]);
    (v[0], v[1])
}

/// Affine reward-to-go `V(z, -1) = a + b z`, `V(z, +1) = c + d z` under
/// truthful play everywhere: returns `[a, b, c, d]`.
///
/// Truthful play gives `mu1 = z` and `z' = p1 + (1 - 2 p1) z`. Matching the
/// constant and linear coefficients of
///   V(z,-1) = alpha + (1-alpha)(1 - 2z) + delta[(1-p1) V(z',-1) + p1 V(z',+1)]
///   V(z,+1) = alpha + (1-alpha)(2z - 1) + delta[p1 V(z',-1) + (1-p1) V(z',+1)]
/// gives four linear equations.
pub fn truthful_affine_values(p1: f64, alpha: f64, delta: f64) -> [f64; 4] {
    let s = 1.0 - 2.0 * p1;
    let stay = 1.0 - p1;
    // V(z', x) = coef0 + coef1 * (p1 + s z): constant part uses p1, linear part uses s
    let a = [
        // constant term of V(z,-1)
        [
            1.0 - delta * stay,
            -delta * stay * p1,
            -delta * p1,
            -delta * p1 * p1,
        ],
        // linear term of V(z,-1)
        [0.0, 1.0 - delta * stay * s, 0.0, -delta * p1 * s],
        // constant term of V(z,+1)
        [
            -delta * p1,
            -delta * p1 * p1,
            1.0 - delta * stay,
            -delta * stay * p1,
        ],
        // linear term of V(z,+1)
        [0.0, -delta * p1 * s, 0.0, 1.0 - delta * stay * s],
    ];
    let b = [
        alpha + (1.0 - alpha),
        -2.0 * (1.0 - alpha),
        alpha - (1.0 - alpha),
        2.0 * (1.0 - alpha),
    ];
    solve_dense(a, b)
}

/// Fixed point of `z -> phi(z)` found by plain iteration of the two-state
/// chain, written directly from the transition probabilities.
pub fn iterate_stationary(p1: f64, p2: f64, g_minus: f64, g_plus: f64) -> f64 {
    let mut z = 0.5;
    for _ in 0..10_000 {
        let stay_plus = g_plus * (1.0 - p1) + (1.0 - g_plus) * (1.0 - p2);
        let enter_plus = g_minus * p2 + (1.0 - g_minus) * p1;
        z = z * stay_plus + (1.0 - z) * enter_plus;
    }
    z
}
