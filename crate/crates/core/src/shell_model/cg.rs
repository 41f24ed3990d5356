//! Clebsch-Gordan coefficients in the Condon-Shortley convention.
//!
//! All angular momenta are passed as twice-values so half-integer spins stay
//! in integer arithmetic: `clebsch_gordan(1, 1, 1, -1, 2, 0)` is
//! ⟨½ ½, ½ -½ | 1 0⟩.

fn factorial(n: i64) -> f64 {
    debug_assert!(n >= 0);
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// ⟨j1 m1, j2 m2 | J M⟩ via the Racah closed-form summation.
///
/// Invalid or incompatible quantum numbers (projection mismatch, triangle
/// rule violation, parity mismatch between j and m) return 0 rather than
/// an error.
pub fn clebsch_gordan(j1: i32, m1: i32, j2: i32, m2: i32, j: i32, m: i32) -> f64 {
    if j1 < 0 || j2 < 0 || j < 0 {
        return 0.0;
    }
    if m1 + m2 != m {
        return 0.0;
    }
    if m1.abs() > j1 || m2.abs() > j2 || m.abs() > j {
        return 0.0;
    }
    // m must have the same parity as j for a valid projection.
    if (j1 + m1) % 2 != 0 || (j2 + m2) % 2 != 0 || (j + m) % 2 != 0 {
        return 0.0;
    }
    if j > j1 + j2 || j < (j1 - j2).abs() || (j1 + j2 + j) % 2 != 0 {
        return 0.0;
    }

    let h = |x: i32| -> i64 {
        debug_assert!(x % 2 == 0);
        (x / 2) as i64
    };

    let triangle = factorial(h(j1 + j2 - j)) * factorial(h(j1 - j2 + j))
        * factorial(h(-j1 + j2 + j))
        / factorial(h(j1 + j2 + j) + 1);
    let proj = factorial(h(j1 + m1))
        * factorial(h(j1 - m1))
        * factorial(h(j2 + m2))
        * factorial(h(j2 - m2))
        * factorial(h(j + m))
        * factorial(h(j - m));
    let prefactor = ((j as f64 + 1.0) * triangle * proj).sqrt();

    let a1 = h(j1 + j2 - j);
    let a2 = h(j1 - m1);
    let a3 = h(j2 + m2);
    let a4 = h(j - j2 + m1);
    let a5 = h(j - j1 - m2);

    let k_min = 0.max(-a4).max(-a5);
    let k_max = a1.min(a2).min(a3);
    let mut sum = 0.0;
    for k in k_min..=k_max {
        let denom = factorial(k)
            * factorial(a1 - k)
            * factorial(a2 - k)
            * factorial(a3 - k)
            * factorial(a4 + k)
            * factorial(a5 + k);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign / denom;
    }
    prefactor * sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_spin_half_values() {
        // (1/2,1/2; 1/2,-1/2 | 1,0) = 1/sqrt(2)
        assert!((clebsch_gordan(1, 1, 1, -1, 2, 0) - 1.0 / 2.0_f64.sqrt()).abs() < 1e-14);
        // stretched state
        assert!((clebsch_gordan(1, 1, 1, 1, 2, 2) - 1.0).abs() < 1e-14);
        // singlet: (1/2,1/2; 1/2,-1/2 | 0,0) = 1/sqrt(2)
        assert!((clebsch_gordan(1, 1, 1, -1, 0, 0) - 1.0 / 2.0_f64.sqrt()).abs() < 1e-14);
        assert!((clebsch_gordan(1, -1, 1, 1, 0, 0) + 1.0 / 2.0_f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn integer_spin_value() {
        // (1,0; 1,0 | 2,0) = sqrt(2/3)
        assert!((clebsch_gordan(2, 0, 2, 0, 4, 0) - (2.0_f64 / 3.0).sqrt()).abs() < 1e-14);
        // (1,0; 1,0 | 1,0) = 0 by symmetry
        assert!(clebsch_gordan(2, 0, 2, 0, 2, 0).abs() < 1e-14);
    }

    #[test]
    fn invalid_quantum_numbers_are_zero() {
        assert_eq!(clebsch_gordan(1, 1, 1, 1, 2, 0), 0.0); // M != m1+m2
        assert_eq!(clebsch_gordan(1, 1, 1, 1, 6, 2), 0.0); // triangle rule
        assert_eq!(clebsch_gordan(2, 1, 2, 1, 4, 2), 0.0); // parity of (j, m)
    }

    /// Independent oracle: build the m1-recursion from the stretched state
    /// using the angular-momentum ladder relation
    ///   C(J,M) <j1 m1 j2 m2|J M> =
    ///     C(j1, m1+1)... (applied through J- on the coupled state)
    /// and cross-check every coefficient reachable for small j.
    fn cg_by_recursion(j1: i32, j2: i32, jj: i32) -> Vec<((i32, i32, i32), f64)> {
        // Start from |J J> expressed in the uncoupled basis by downward
        // recursion in M. Represent each |J M> as a map m1 -> coefficient
        // (m2 = M - m1 follows).
        use std::collections::HashMap;
        let mut out = Vec::new();
        // Stretched top state: sum over m1 of the J=M=J coefficients solved
        // from orthogonality would be circular; instead seed with m1 = j1,
        // m2 = J - j1 coefficient fixed to the known positive-phase value 1
        // only when J = j1 + j2 (true stretched state). For smaller J, seed
        // by Gram-Schmidt against the higher-J states at M = J.
        let lower = |j: i32, m: i32| -> f64 {
            // <j m-1 | J- | j m> matrix element, twice-values: sqrt(j(j+1)-m(m-1))
            let jf = j as f64 / 2.0;
            let mf = m as f64 / 2.0;
            (jf * (jf + 1.0) - mf * (mf - 1.0)).sqrt()
        };
        // States at projection M for all J' >= jj, built top-down.
        let mut at_m: HashMap<(i32, i32), HashMap<i32, f64>> = HashMap::new();
        let j_max = j1 + j2;
        for jcur in (jj..=j_max).rev().step_by(2) {
            // Seed |jcur, jcur>: orthogonal to all |J', jcur> with J' > jcur.
            let mut seed: HashMap<i32, f64> = HashMap::new();
            if jcur == j_max {
                seed.insert(j1, 1.0);
            } else {
                // Basis of m1 values at M = jcur.
                let m = jcur;
                let m1_lo = (-j1).max(m - j2);
                let m1_hi = j1.min(m + j2);
                // Seed with the unit vector at maximal m1: its component on
                // the orthogonal complement is nonzero because the top
                // coefficient of |J, J> is strictly positive, whereas an
                // all-ones seed can be parallel to the higher-J states.
                let mut v: HashMap<i32, f64> = HashMap::new();
                let mut m1 = m1_lo;
                while m1 <= m1_hi {
                    v.insert(m1, if m1 == m1_hi { 1.0 } else { 0.0 });
                    m1 += 2;
                }
                // Gram-Schmidt against higher-J states at this M.
                let mut jh = jcur + 2;
                while jh <= j_max {
                    let u = at_m.get(&(jh, m)).unwrap();
                    let dot: f64 = v.iter().map(|(k, a)| a * u.get(k).copied().unwrap_or(0.0)).sum();
                    for (k, a) in v.iter_mut() {
                        *a -= dot * u.get(k).copied().unwrap_or(0.0);
                    }
                    jh += 2;
                }
                let norm: f64 = v.values().map(|a| a * a).sum::<f64>().sqrt();
                for (k, a) in v.iter() {
                    seed.insert(*k, a / norm);
                }
                // Condon-Shortley: coefficient with maximal m1 is positive.
                let top = seed.get(&m1_hi).copied().unwrap_or(0.0);
                if top < 0.0 {
                    for a in seed.values_mut() {
                        *a = -*a;
                    }
                }
            }
            at_m.insert((jcur, jcur), seed);
            // Walk M downward with J-.
            let mut m = jcur;
            while m > -jcur {
                let cur = at_m.get(&(jcur, m)).unwrap().clone();
                let denom = lower(jcur, m);
                let mut next: HashMap<i32, f64> = HashMap::new();
                for (&m1, &a) in &cur {
                    let m2 = m - m1;
                    // J- = j1- + j2-
                    if m1 - 2 >= -j1 {
                        *next.entry(m1 - 2).or_insert(0.0) += a * lower(j1, m1) / denom;
                    }
                    if m2 - 2 >= -j2 {
                        *next.entry(m1).or_insert(0.0) += a * lower(j2, m2) / denom;
                    }
                }
                at_m.insert((jcur, m - 2), next);
                m -= 2;
            }
        }
        for ((jcur, m), v) in at_m {
            if jcur == jj {
                for (m1, a) in v {
                    out.push(((m1, m - m1, m), a));
                }
            }
        }
        out
    }

    #[test]
    fn matches_ladder_recursion_oracle() {
        for &(j1, j2) in &[(1i32, 1i32), (2, 2), (3, 1), (5, 3), (5, 5), (7, 4)] {
            let mut jj = (j1 - j2).abs();
            while jj <= j1 + j2 {
                for ((m1, m2, m), expected) in cg_by_recursion(j1, j2, jj) {
                    let got = clebsch_gordan(j1, m1, j2, m2, jj, m);
                    assert!(
                        (got - expected).abs() < 1e-10,
                        "CG({j1},{m1};{j2},{m2}|{jj},{m}): got {got}, oracle {expected}"
                    );
                }
                jj += 2;
            }
        }
    }

    #[test]
    fn orthogonality() {
        // sum over m1,m2 of <j1m1 j2m2|JM><j1m1 j2m2|J'M'> = delta delta
        for &(j1, j2) in &[(1i32, 1i32), (3, 3), (5, 3), (7, 7)] {
            let mut jj = (j1 - j2).abs();
            while jj <= j1 + j2 {
                let mut jp = (j1 - j2).abs();
                while jp <= j1 + j2 {
                    for m in (-jj..=jj).step_by(2) {
                        for mp in (-jp..=jp).step_by(2) {
                            let mut s = 0.0;
                            for m1 in (-j1..=j1).step_by(2) {
                                for m2 in (-j2..=j2).step_by(2) {
                                    s += clebsch_gordan(j1, m1, j2, m2, jj, m)
                                        * clebsch_gordan(j1, m1, j2, m2, jp, mp);
                                }
                            }
                            let expect = if jj == jp && m == mp { 1.0 } else { 0.0 };
                            assert!(
                                (s - expect).abs() < 1e-12,
                                "orthogonality failed for j1={j1} j2={j2} J={jj} J'={jp} M={m} M'={mp}: {s}"
                            );
                        }
                    }
                    jp += 2;
                }
                jj += 2;
            }
        }
    }
}
