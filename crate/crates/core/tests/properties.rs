mod common;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

use common::{fixture, p1_period, FIXTURES};
use toric_mirror_core::cohomology::{CohomClass, Polynomial, RingPresentation};
use toric_mirror_core::gamma_class::{central_charge, gamma_asymptotic_value, gamma_class, KClass, ZetaTable};
use toric_mirror_core::gkz::{i_function, is_homogeneous, mirror_map};
use toric_mirror_core::linalg::det_int;
use toric_mirror_core::mellin_barnes::{difference_check, residue_at, residue_sum};
use toric_mirror_core::oscillatory::{asymptotic_compare, build_potential, positive_cycle_integral};
use toric_mirror_core::quantum_ring::{classical_limit, ell, qsr_multiply, QsrElement};
use toric_mirror_core::toric_geom::{fan_from_git, fan_polytope_volume, git_from_fan, mori_points, CurveClass};

fn rat(x: i64) -> BigRational {
    BigRational::from_integer(x.into())
}

fn fixture_index() -> impl Strategy<Value = usize> {
    0..FIXTURES.len()
}

#[test]
fn fan_and_git_round_trip() {
    for name in FIXTURES {
        let m = fixture(name);
        let fan = m.variety.fan();
        let git = git_from_fan(fan, Some(m.variety.git().omega())).unwrap();
        let back = fan_from_git(&git).unwrap();
        assert!(back.is_isomorphic_to(fan), "{name}");
    }
}

#[test]
fn volume_counts_cones_and_determinants() {
    for name in FIXTURES {
        let m = fixture(name);
        let fan = m.variety.fan();
        let dets: i64 = fan.max_cones().iter().map(|c| det_int(&fan.cone_matrix(c)).abs()).sum();
        let cones = fan.max_cones().len() as i64;
        assert_eq!(fan_polytope_volume(fan) as i64, cones, "{name}");
        assert_eq!(dets, cones, "{name}");
    }
}

#[test]
fn wall_classes_are_positive_on_omega() {
    for name in FIXTURES {
        let m = fixture(name);
        let git = m.variety.git();
        for d in m.variety.wall_classes() {
            assert!(git.omega_degree(d) > BigRational::zero(), "{name}: {d:?}");
        }
    }
}

#[test]
fn mori_points_are_downward_closed() {
    for name in FIXTURES {
        let m = fixture(name);
        let tv = &m.variety;
        let omega = tv.git().omega().to_vec();
        let pts = mori_points(tv, &omega, 5).unwrap();
        let mut unique = pts.clone();
        unique.sort();
        unique.dedup();
        assert_eq!(unique.len(), pts.len(), "{name}: duplicate points");
        for d in &pts {
            // every d' = d - g for a generator g that stays in the cone is listed
            for g in tv.mori_generators() {
                let smaller = d.sub(&CurveClass(g.clone()));
                if tv.mori_contains(&smaller.0) {
                    assert!(pts.contains(&smaller), "{name}: {smaller:?} below {d:?} missing");
                }
            }
        }
    }
}

fn small_class(pres: &RingPresentation, coeffs: &[i64]) -> CohomClass<BigRational> {
    pres.from_coeffs(coeffs.iter().cycle().take(pres.dim()).map(|&c| rat(c)).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cohomology_ring_axioms(idx in fixture_index(),
                              a in prop::collection::vec(-4i64..5, 6),
                              b in prop::collection::vec(-4i64..5, 6),
                              c in prop::collection::vec(-4i64..5, 6)) {
        let m = fixture(FIXTURES[idx]);
        let pres = RingPresentation::build(&m.variety).unwrap();
        let (x, y, z) = (small_class(&pres, &a), small_class(&pres, &b), small_class(&pres, &c));
        let mul = |u: &CohomClass<BigRational>, v: &CohomClass<BigRational>| pres.multiply(u, v).unwrap();
        prop_assert_eq!(mul(&x, &y), mul(&y, &x));
        prop_assert_eq!(mul(&mul(&x, &y), &z), mul(&x, &mul(&y, &z)));
        prop_assert_eq!(mul(&x, &pres.one()), x.clone());
        prop_assert_eq!(mul(&x, &y.add(&z)), mul(&x, &y).add(&mul(&x, &z)));
    }

    #[test]
    fn normal_form_is_idempotent(idx in fixture_index(),
                                 terms in prop::collection::vec((0u32..4, 0u32..4, -5i64..6), 1..6)) {
        let m = fixture(FIXTURES[idx]);
        let pres = RingPresentation::build(&m.variety).unwrap();
        let k = pres.k();
        let mut poly = Polynomial::new();
        for (e0, e1, c) in terms {
            let mono = if k == 1 { vec![e0 + e1] } else { vec![e0, e1] };
            *poly.entry(mono).or_insert_with(BigRational::zero) += rat(c);
        }
        poly.retain(|_, c| !c.is_zero());
        let once = pres.normal_form(&poly);
        let twice = pres.normal_form(&pres.to_polynomial(&once));
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn qsr_is_commutative_and_associative(idx in fixture_index(),
                                          picks in prop::collection::vec((0usize..8, -2i64..3), 3)) {
        let m = fixture(FIXTURES[idx]);
        let tv = &m.variety;
        let bound = 4;
        let rays = tv.fan().rays();
        let elem = |(i, s): (usize, i64)| {
            // w_{s b_i + b_{i+1}}
            let a = &rays[i % rays.len()];
            let b = &rays[(i + 1) % rays.len()];
            let v: Vec<i64> = a.iter().zip(b).map(|(x, y)| s * x + y).collect();
            QsrElement::w(v, tv.k(), bound)
        };
        let (x, y, z) = (elem(picks[0]), elem(picks[1]), elem(picks[2]));
        let mul = |u: &QsrElement, v: &QsrElement| qsr_multiply(tv, u, v).unwrap();
        prop_assert_eq!(mul(&x, &y), mul(&y, &x));
        prop_assert_eq!(mul(&mul(&x, &y), &z), mul(&x, &mul(&y, &z)));
        let lim = classical_limit(&mul(&x, &y));
        prop_assert_eq!(lim, classical_limit(&mul(&classical_limit(&x), &classical_limit(&y))));
    }

    #[test]
    fn ell_is_symmetric(idx in fixture_index(),
                        v in prop::collection::vec(-3i64..4, 2),
                        w in prop::collection::vec(-3i64..4, 2)) {
        let m = fixture(FIXTURES[idx]);
        let tv = &m.variety;
        let n = tv.n();
        let (v, w) = (&v[..n], &w[..n]);
        prop_assert_eq!(ell(tv, v, w).unwrap(), ell(tv, w, v).unwrap());
        prop_assert!(ell(tv, v, &vec![0; n]).unwrap().is_zero());
    }

    #[test]
    fn p1_period_matches_the_oracle(log_q in -9.2f64..0.0, zi in 0usize..3) {
        let z = [0.5, 1.0, 2.0][zi];
        let q = log_q.exp();
        let tol = 1e-9;
        let m = fixture("p1");
        let w = build_potential(&m.variety).unwrap();
        let v = positive_cycle_integral(&w, &[q], z, tol).unwrap().value;
        prop_assert!((v - p1_period(q, z)).abs() <= 10.0 * tol);
    }

    #[test]
    fn halving_tol_does_not_increase_the_error(log_q in -9.2f64..0.0, zi in 0usize..3) {
        let z = [0.5, 1.0, 2.0][zi];
        let q = log_q.exp();
        let m = fixture("p1");
        let w = build_potential(&m.variety).unwrap();
        let exact = p1_period(q, z);
        let mut prev = f64::INFINITY;
        for tol in [1e-4, 5e-5, 2.5e-5, 1.25e-5] {
            let err = (positive_cycle_integral(&w, &[q], z, tol).unwrap().value - exact).abs();
            // allow for the rounding floor of the oracle itself
            prop_assert!(err <= prev.max(1e-13), "tol {tol}: {err} > {prev}");
            prev = err;
        }
    }

    #[test]
    fn difference_equations_hold(idx in fixture_index(),
                                 points in prop::collection::vec((0.2f64..1.0, -0.2f64..0.2, 0.2f64..1.0, -0.2f64..0.2), 100),
                                 z in 0.5f64..1.5) {
        let m = fixture(FIXTURES[idx]);
        let git = m.variety.git();
        let k = git.k();
        let gens = m.variety.mori_generators().to_vec();
        for (j, (a, b, c, d)) in points.into_iter().enumerate() {
            let p: Vec<Complex64> = [Complex64::new(a, b), Complex64::new(c, d)][..k].to_vec();
            let class = CurveClass(gens[j % gens.len()].clone());
            let r = difference_check(&p, z, &class, git).unwrap();
            prop_assert!(r.residual < 1e-10, "{:?} at {p:?}", r);
        }
    }

    /// Far from the origin `|Î|` grows like `exp(π |Im D_i|)`, so the
    /// residual is measured against the larger side.
    #[test]
    fn difference_equations_hold_relatively(idx in fixture_index(),
                                            points in prop::collection::vec((-2.5f64..2.5, -1.5f64..1.5, -2.5f64..2.5, -1.5f64..1.5), 100),
                                            z in 0.3f64..3.0) {
        let m = fixture(FIXTURES[idx]);
        let git = m.variety.git();
        let k = git.k();
        let gens = m.variety.mori_generators().to_vec();
        for (j, (a, b, c, d)) in points.into_iter().enumerate() {
            let p: Vec<Complex64> = [Complex64::new(a, b), Complex64::new(c, d)][..k].to_vec();
            let class = CurveClass(gens[j % gens.len()].clone());
            let r = match difference_check(&p, z, &class, git) {
                Ok(r) => r,
                Err(e) => { prop_assert_eq!(e.kind(), "PoleHit"); continue; }
            };
            prop_assert!(r.residual <= 1e-10 * r.scale.max(1.0), "{:?} at {p:?}", r);
        }
    }
}

#[test]
fn cohomology_pairing_and_betti() {
    for name in FIXTURES {
        let m = fixture(name);
        let pres = RingPresentation::build(&m.variety).unwrap();
        let betti = pres.betti();
        let mut rev = betti.clone();
        rev.reverse();
        assert_eq!(betti, rev, "{name}");
        let pm = pres.pairing_matrix();
        let det = toric_mirror_core::linalg::inverse_rational(&pm);
        assert!(det.is_some(), "{name}: degenerate pairing");
    }
}

#[test]
fn i_function_is_homogeneous_and_mirror_map_unipotent() {
    for name in FIXTURES {
        let m = fixture(name);
        let tv = &m.variety;
        let pres = RingPresentation::build(tv).unwrap();
        let i = i_function(tv, &pres, 6).unwrap();
        assert!(is_homogeneous(tv, &pres, &i), "{name}");
        let mm = mirror_map(tv, &pres, &i).unwrap();
        for (a, psi) in mm.psi.iter().enumerate() {
            let mut unit = vec![0; tv.k()];
            unit[a] = 1;
            let qa = CurveClass(unit);
            assert_eq!(psi.get(&qa), Some(&BigRational::one()), "{name}");
            for d in psi.keys() {
                assert!(tv.mori_contains(&d.sub(&qa).0), "{name}: psi_{a} has term {d:?}");
            }
        }
    }
}

#[test]
fn gamma_degree_two_part_is_minus_gamma_c1() {
    let table = ZetaTable::shared();
    for name in FIXTURES {
        let m = fixture(name);
        let pres = RingPresentation::build(&m.variety).unwrap();
        let g = gamma_class(&pres, table);
        let c1 = pres.c1::<f64>();
        for idx in pres.degree_range(1) {
            let expected = -table.euler_gamma * c1.coeffs()[idx];
            assert!((g.coeffs()[idx] - expected).abs() <= 1e-15 * table.euler_gamma * c1.max_magnitude(), "{name}");
        }
    }
}

#[test]
fn central_charge_converges_with_the_bound() {
    let table = ZetaTable::shared();
    for name in ["p1", "p2", "p1xp1", "f1"] {
        let m = fixture(name);
        let tv = &m.variety;
        let pres = RingPresentation::build(tv).unwrap();
        let q = vec![0.05; tv.k()];
        let e = KClass::structure_sheaf(tv.k());
        let values: Vec<_> = [6, 8, 10]
            .iter()
            .map(|&b| central_charge(tv, &pres, table, &e, &i_function(tv, &pres, b).unwrap(), &q, 1.0).unwrap())
            .collect();
        for pair in values.windows(2) {
            let diff = (pair[1].value - pair[0].value).norm() / pair[1].value.norm();
            assert!(diff <= pair[0].last_contribution.max(1e-15), "{name}: {diff} vs {}", pair[0].last_contribution);
        }
    }
}

#[test]
fn central_charge_approaches_the_gamma_value() {
    let table = ZetaTable::shared();
    for name in ["p1", "p2", "p1xp1", "f1", "f2"] {
        let m = fixture(name);
        let tv = &m.variety;
        let pres = RingPresentation::build(tv).unwrap();
        let i = i_function(tv, &pres, 6).unwrap();
        let e = KClass::structure_sheaf(tv.k());
        let gap = |q: f64| {
            let qv = vec![q; tv.k()];
            let cc = central_charge(tv, &pres, table, &e, &i, &qv, 1.0).unwrap().value.re;
            (gamma_asymptotic_value(&pres, table, &qv, 1.0).unwrap() - cc).abs()
        };
        let gaps: Vec<f64> = [1e-2, 1e-3, 1e-4].iter().map(|&q| gap(q)).collect();
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{name}: {gaps:?}");
    }
}

#[test]
fn asymptotic_errors_decrease_along_the_ray() {
    let table = ZetaTable::shared();
    for name in ["p1", "p2"] {
        let m = fixture(name);
        let pres = RingPresentation::build(&m.variety).unwrap();
        let w = build_potential(&m.variety).unwrap();
        let rows = asymptotic_compare(&w, &pres, table, &[1e-2, 1e-3, 1e-4, 1e-5], 1.0, 1e-11).unwrap();
        for pair in rows.windows(2) {
            assert!(pair[1].abs_err < pair[0].abs_err, "{name}: {rows:?}");
        }
    }
}

#[test]
fn residue_sums_match_quadrature() {
    let table = ZetaTable::shared();
    let tol = 1e-10;
    for name in ["p1", "p2"] {
        let m = fixture(name);
        let w = build_potential(&m.variety).unwrap();
        for q in [0.01, 0.1, 0.25] {
            for z in [0.5, 1.0, 2.0] {
                let rs = residue_sum(m.variety.git(), q, z, 40, table).unwrap();
                let v = positive_cycle_integral(&w, &[q], z, tol).unwrap().value;
                assert!((rs.value - v).abs() <= rs.tail_estimate + tol, "{name} q={q} z={z}: {} vs {v}", rs.value);
            }
        }
    }
}

#[test]
fn leading_residue_is_the_gamma_value() {
    let table = ZetaTable::shared();
    for name in ["p1", "p2"] {
        let m = fixture(name);
        let pres = RingPresentation::build(&m.variety).unwrap();
        for (q, z) in [(0.1, 1.0), (0.01, 0.5), (0.3, 2.0)] {
            let r0 = residue_at(m.variety.git(), q, z, 0, table).unwrap();
            let g = gamma_asymptotic_value(&pres, table, &[q], z).unwrap();
            assert!((r0 - g).abs() <= 1e-12 * g.abs().max(1.0), "{name}: {r0} vs {g}");
        }
    }
}
