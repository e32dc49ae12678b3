//! Property tests of the structural invariants: grids, coverings, energies,
//! liftings and splits.

use std::f64::consts::{PI, TAU};

use liftlab_core::covering::{CoveringChart, CoveringFamily, DeckElement, Point, TargetGeometry};
use liftlab_core::decompose::{mollify, phi_energy, split_sum_space, sum_objective};
use liftlab_core::domain::{make_domain, DomainKind, GridDomain};
use liftlab_core::energy::{gagliardo, large_osc_energy, truncated, x_energy, Field};
use liftlab_core::lifting::{chain_rule_residual, deck_align, lift_field, lift_path, Alignment};
use proptest::prelude::*;

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn domain_strategy() -> impl Strategy<Value = GridDomain> {
    (
        prop_oneof![Just(DomainKind::Interval), Just(DomainKind::Cube), Just(DomainKind::Torus)],
        1usize..=2,
        2usize..=12,
        0.25f64..4.0,
    )
        .prop_map(|(kind, m, n, side)| {
            let m = if kind == DomainKind::Interval { 1 } else { m };
            make_domain(kind, m, n, side).unwrap()
        })
}

/// A smooth phase with a few random Fourier modes and an integer winding along axis 0.
fn phase(dom: &GridDomain, winding: i64, coeffs: &[f64]) -> Vec<f64> {
    let side = dom.side();
    (0..dom.len())
        .map(|i| {
            let x = dom.point(i);
            let (u, v) = (x[0] / side, x[1] / side);
            let mut t = TAU * winding as f64 * u;
            for (k, c) in coeffs.iter().enumerate() {
                let f = (k + 1) as f64;
                t += c * (TAU * f * u + 0.7 * f).sin() + 0.5 * c * (TAU * f * v).cos();
            }
            t
        })
        .collect()
}

fn circle_field(dom: &GridDomain, angles: &[f64]) -> Field {
    Field::new(dom.clone(), TargetGeometry::Circle(TAU), angles.iter().map(|&a| [a.rem_euclid(TAU), 0.0]).collect()).unwrap()
}

fn deck_field(cov: &CoveringChart, f: &Field, elem: DeckElement) -> Field {
    let vals: Vec<Point> = f.values().iter().map(|v| cov.deck_apply(elem, v).unwrap()).collect();
    Field::new(f.domain().clone(), f.space(), vals).unwrap()
}

proptest! {
    #[test]
    fn line_sections_partition_the_grid(dom in domain_strategy()) {
        for axis in 0..dom.dim() {
            let mut seen = vec![0u32; dom.len()];
            for line in dom.line_sections(axis).unwrap() {
                prop_assert_eq!(line.indices.len(), dom.n());
                for w in line.indices.windows(2) {
                    prop_assert_eq!(dom.step(w[0], axis, true), Some(w[1]));
                }
                for &i in &line.indices {
                    seen[i] += 1;
                }
            }
            prop_assert!(seen.iter().all(|&c| c == 1));
        }
    }

    #[test]
    fn geodesic_distance_is_a_metric(dom in domain_strategy(), a in 0usize..4096, b in 0usize..4096, c in 0usize..4096) {
        let (a, b, c) = (a % dom.len(), b % dom.len(), c % dom.len());
        let d = |i, j| dom.geodesic_distance(i, j).unwrap();
        prop_assert_eq!(d(a, a), 0.0);
        prop_assert_eq!(d(a, b), d(b, a));
        prop_assert!(d(a, c) <= d(a, b) + d(b, c) + 1e-12);
    }

    #[test]
    fn total_measure_is_stable_under_refinement(dom in domain_strategy()) {
        let fine = make_domain(dom.kind(), dom.dim(), 2 * dom.n(), dom.side()).unwrap();
        prop_assert!(rel_close(dom.total_measure(), fine.total_measure(), 1e-12));
        prop_assert!(rel_close(dom.weight() * dom.len() as f64, dom.total_measure(), 1e-12));
    }
}

/// A deck element of `cov` built from two integers; k-fold elements are residues mod k.
fn deck_element(cov: &CoveringChart, k: i64, l: i64) -> DeckElement {
    match cov.family() {
        CoveringFamily::KFoldCircle(order) => DeckElement::Rank1(k.rem_euclid(order as i64)),
        CoveringFamily::LineOverCircle => DeckElement::Rank1(k),
        CoveringFamily::PlaneOverTorus => DeckElement::Rank2(k, l),
    }
}

fn covering_for(which: u8) -> CoveringChart {
    match which {
        0 => CoveringChart::line_over_circle(),
        1 => CoveringChart::kfold_circle(3).unwrap(),
        _ => CoveringChart::plane_over_torus(),
    }
}

/// Two nearby points of the total space: `x` anywhere, `y` within distance `r·inj` of it.
fn total_pair(cov: &CoveringChart, x: [f64; 2], dir: f64, r: f64) -> (Point, Point) {
    let total = cov.total();
    let x = total.canonical(&[x[0], if total.dim() == 2 { x[1] } else { 0.0 }]);
    let step = r * cov.inj();
    let y = match total.dim() {
        1 => [x[0] + step * dir.cos().signum(), 0.0],
        _ => [x[0] + step * dir.cos(), x[1] + step * dir.sin()],
    };
    (x, total.canonical(&y))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn covering_is_a_local_isometry(which in 0u8..3, x in prop::array::uniform2(-50.0f64..50.0), dir in 0.0..TAU, r in 0.0f64..1.0) {
        let cov = covering_for(which);
        let (a, b) = total_pair(&cov, x, dir, r);
        let dt = cov.total().distance(&a, &b);
        prop_assume!(dt <= cov.inj());
        let db = cov.base().distance(&cov.project(&a), &cov.project(&b));
        prop_assert!((dt - db).abs() <= 1e-12, "total {} base {}", dt, db);
    }

    #[test]
    fn local_lift_inverts_projection(which in 0u8..3, x in prop::array::uniform2(-50.0f64..50.0), dir in 0.0..TAU, r in 0.0f64..0.999) {
        let cov = covering_for(which);
        let (reference, target) = total_pair(&cov, x, dir, r);
        let lifted = cov.local_lift(&cov.project(&target), &reference).unwrap();
        prop_assert!(cov.total().distance(&lifted, &target) <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1_000))]

    #[test]
    fn deck_elements_are_isometries(which in 0u8..3, x in prop::array::uniform2(-50.0f64..50.0), y in prop::array::uniform2(-50.0f64..50.0), k in -5i64..=5, l in -5i64..=5) {
        let cov = covering_for(which);
        let total = cov.total();
        let elem = deck_element(&cov, k, l);
        let (a, b) = (total.canonical(&x), total.canonical(&y));
        let (a, b) = if total.dim() == 1 { ([a[0], 0.0], [b[0], 0.0]) } else { (a, b) };
        let (ta, tb) = (cov.deck_apply(elem, &a).unwrap(), cov.deck_apply(elem, &b).unwrap());
        prop_assert!((total.distance(&ta, &tb) - total.distance(&a, &b)).abs() <= 1e-12 * (1.0 + total.distance(&a, &b)));
        prop_assert!(cov.base().distance(&cov.project(&ta), &cov.project(&a)) <= 1e-9);
    }
}

fn energy_field() -> impl Strategy<Value = (GridDomain, Vec<f64>)> {
    (prop_oneof![Just(DomainKind::Cube), Just(DomainKind::Torus)], 1usize..=2, 4usize..=10)
        .prop_flat_map(|(kind, m, n)| {
            let dom = make_domain(kind, m, if m == 1 { 4 * n } else { n }, 1.0).unwrap();
            let len = dom.len();
            (Just(dom), prop::collection::vec(-3.0f64..3.0, len))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn energies_do_not_depend_on_thread_count((dom, v) in energy_field(), s in 0.05f64..0.95, p in 1.0f64..4.0) {
        let f = Field::from_reals(&dom, &v).unwrap();
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| (gagliardo(&f, s, p).unwrap().value, truncated(&f, s, p, 0.5).unwrap().value))
        };
        let (one, four) = (run(1), run(4));
        prop_assert_eq!(one.0.to_bits(), four.0.to_bits());
        prop_assert_eq!(one.1.to_bits(), four.1.to_bits());
    }

    #[test]
    fn doubled_half_sum_equals_full_sum((dom, v) in energy_field(), s in 0.05f64..0.95, p in 1.0f64..4.0) {
        let f = Field::from_reals(&dom, &v).unwrap();
        let e = dom.dim() as f64 + s * p;
        let mut full = 0.0;
        for i in 0..dom.len() {
            for j in 0..dom.len() {
                if i != j {
                    full += (v[i] - v[j]).abs().powf(p) / dom.geodesic_distance(i, j).unwrap().powf(e);
                }
            }
        }
        full *= dom.weight() * dom.weight();
        let got = gagliardo(&f, s, p).unwrap();
        prop_assert!(rel_close(got.value, full, 1e-12), "{} vs {}", got.value, full);
        prop_assert_eq!(got.pair_count, (dom.len() * (dom.len() - 1)) as u64);
    }

    #[test]
    fn truncated_energy_is_monotone_in_q((dom, v) in energy_field(), s in 0.05f64..0.95, p in 1.0f64..4.0, a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let f = Field::from_reals(&dom, &v).unwrap();
        let (q0, q1) = (p * a.min(b), p * a.max(b));
        let (e0, e1) = (truncated(&f, s, p, q0).unwrap().value, truncated(&f, s, p, q1).unwrap().value);
        prop_assert!(e0 <= e1 * (1.0 + 1e-12));
        prop_assert!(e1 <= gagliardo(&f, s, p).unwrap().value * (1.0 + 1e-12));
    }

    #[test]
    fn gagliardo_is_p_homogeneous((dom, v) in energy_field(), s in 0.05f64..0.95, p in 1.0f64..4.0, t in -4.0f64..4.0) {
        let f = Field::from_reals(&dom, &v).unwrap();
        let tf = Field::from_reals(&dom, &v.iter().map(|x| t * x).collect::<Vec<_>>()).unwrap();
        let (e, et) = (gagliardo(&f, s, p).unwrap().value, gagliardo(&tf, s, p).unwrap().value);
        prop_assert!((et - t.abs().powf(p) * e).abs() <= 1e-12 * (et.abs() + t.abs().powf(p) * e) + 1e-300);
    }

    #[test]
    fn energies_are_deck_invariant(which in 0u8..3, (dom, v) in energy_field(), k in -3i64..=3, l in -3i64..=3, s in 0.1f64..0.9, p in 1.0f64..3.0) {
        let cov = covering_for(which);
        let total = cov.total();
        let vals: Vec<Point> = v.iter().enumerate().map(|(i, &a)| total.canonical(&[2.0 * a, if total.dim() == 2 { v[(i + 1) % v.len()] } else { 0.0 }])).collect();
        let f = Field::new(dom.clone(), total, vals).unwrap();
        let elem = deck_element(&cov, k, l);
        let g = deck_field(&cov, &f, elem);
        let pairs = [
            (gagliardo(&f, s, p).unwrap().value, gagliardo(&g, s, p).unwrap().value),
            (truncated(&f, s, p, 0.5).unwrap().value, truncated(&g, s, p, 0.5).unwrap().value),
            (x_energy(&f, &cov).unwrap().value, x_energy(&g, &cov).unwrap().value),
            (large_osc_energy(&f, 0.5, s, p).unwrap().value, large_osc_energy(&g, 0.5, s, p).unwrap().value),
        ];
        for (a, b) in pairs {
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(b.abs()) + 1e-300, "{} vs {}", a, b);
        }
    }
}

/// A winding circle-valued field on a line or square, lifted through `t ↦ t mod 2π`.
fn lifting_case() -> impl Strategy<Value = (GridDomain, Vec<f64>)> {
    (prop_oneof![Just(DomainKind::Cube), Just(DomainKind::Torus)], 1usize..=2, -3i64..=3, prop::collection::vec(-0.8f64..0.8, 3))
        .prop_map(|(kind, m, w, c)| {
            let dom = make_domain(kind, m, if m == 1 { 96 } else { 24 }, 1.0).unwrap();
            // windings only close up along the periodic axis of a 1D torus
            let w = if kind == DomainKind::Torus && m == 2 { 0 } else { w };
            let ph = phase(&dom, w, &c);
            (dom, ph)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lifts_from_different_seeds_differ_by_a_deck_element((dom, ph) in lifting_case(), seed in 0usize..10_000, sheet in -3i64..=3) {
        let cov = CoveringChart::line_over_circle();
        let u = circle_field(&dom, &ph);
        let a = match lift_field(&u, &cov, 0, &[ph[0], 0.0]) {
            Ok(a) => a,
            Err(e) => {
                // only a winding around a periodic axis may obstruct the lift
                prop_assert!(dom.periodic()[0], "{}", e);
                return Ok(());
            }
        };
        let seed = seed % dom.len();
        let b = lift_field(&u, &cov, seed, &[ph[seed] + TAU * sheet as f64, 0.0]).unwrap();
        prop_assert!(a.max_holonomy_residual <= 1e-9);
        prop_assert!(matches!(deck_align(&a.lifted, &b.lifted, &cov).unwrap(), Alignment::Deck(_)));
        let back = a.lifted.project(&cov).unwrap();
        for (x, y) in back.values().iter().zip(u.values()) {
            prop_assert!(cov.base().distance(x, y) <= 1e-12);
        }
        prop_assert!(chain_rule_residual(&u, &a.lifted, &cov).unwrap() <= 1e-12);
        for axis in 0..dom.dim() {
            for line in dom.line_sections(axis).unwrap() {
                let base: Vec<Point> = line.indices.iter().map(|&i| u.value(i)).collect();
                let path = lift_path(&base, &cov, &a.lifted.value(line.indices[0])).unwrap();
                for (&i, q) in line.indices.iter().zip(&path) {
                    prop_assert!((q[0] - a.lifted.value(i)[0]).abs() <= 1e-12);
                }
            }
        }
    }
}

fn torus_field() -> impl Strategy<Value = (GridDomain, Vec<f64>)> {
    (1usize..=2).prop_flat_map(|m| {
        let dom = make_domain(DomainKind::Torus, m, if m == 1 { 48 } else { 12 }, 1.0).unwrap();
        let len = dom.len();
        (Just(dom), prop::collection::vec(-2.0f64..2.0, len))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn mollification_contracts_phi_energy_on_tori((dom, v) in torus_field(), s in 0.1f64..0.9, p in 1.0f64..3.0, width in 0.0f64..0.5) {
        let f = Field::from_reals(&dom, &v).unwrap();
        let g = mollify(&f, width).unwrap();
        let (ef, eg) = (phi_energy(&f, s, p).unwrap().value, phi_energy(&g, s, p).unwrap().value);
        prop_assert!(eg <= ef * (1.0 + 1e-9), "mollified {} original {}", eg, ef);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn split_reassembles_and_beats_trivial_splits(v in prop::collection::vec(-2.0f64..2.0, 24), s in 0.55f64..0.9, p in 2.0f64..3.0) {
        let dom = make_domain(DomainKind::Interval, 1, 24, 1.0).unwrap();
        let f = Field::from_reals(&dom, &v).unwrap();
        let zero = Field::from_reals(&dom, &[0.0; 24]).unwrap();
        let split = split_sum_space(&f, s, p).unwrap();
        let (g, h) = (split.g.reals().unwrap(), split.h.reals().unwrap());
        for i in 0..24 {
            prop_assert!((g[i] + h[i] - v[i]).abs() <= 1e-12);
        }
        prop_assert!(split.objective <= sum_objective(&f, &zero, s, p).unwrap() * (1.0 + 1e-12));
        prop_assert!(split.objective <= sum_objective(&zero, &f, s, p).unwrap() * (1.0 + 1e-12));
        prop_assert!(rel_close(split.objective, sum_objective(&split.g, &split.h, s, p).unwrap(), 1e-12));
    }
}

#[test]
fn half_circle_is_the_injectivity_radius() {
    assert_eq!(CoveringChart::line_over_circle().inj(), PI);
    assert_eq!(CoveringChart::plane_over_torus().inj(), PI);
}
