use proptest::prelude::*;
use qdsim::dense::{dense_ribbon, DenseState};
use qdsim::lattice::Lattice;
use qdsim::linalg::{C64, ONE};
use qdsim::program::{Basis, Builder, Executor, Family, Gate, GateProgram, Slot, Vector};
use qdsim::register::{rng_from_seed, Qudit, QuditId, Role, SparseState};
use qdsim::ribbon::{apply_ribbon, Ribbon};
use qdsim::s3::{irrep_matrix, regular_action, Element, Irrep, Side};

fn element() -> impl Strategy<Value = Element> {
    (0usize..6).prop_map(Element::from_index)
}

fn slot() -> impl Strategy<Value = Slot> {
    prop_oneof![Just(Slot::One), Just(Slot::Ctrl), Just(Slot::CtrlInv)]
}

fn amps(n: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n)
        .prop_map(|v| v.into_iter().map(|(a, b)| C64::new(a, b)).collect())
        .prop_filter("nonzero", |v: &Vec<C64>| v.iter().map(|x| x.norm_sqr()).sum::<f64>() > 1e-3)
}

fn random_state(n: usize, a: &[C64]) -> SparseState {
    let q: Vec<Qudit> = (1..=n as u32).map(Qudit::edge).collect();
    let terms = a.iter().enumerate().map(|(i, &c)| (qdsim::dense::config_of(i, n).into_iter().map(Element::from_index).collect(), c));
    SparseState::from_terms(&q, terms).unwrap().normalized().unwrap().1
}

#[derive(Clone, Debug)]
enum Op {
    Single(u32, Gate),
    Ctrl(u32, u32, Family),
}

fn gate() -> impl Strategy<Value = Gate> {
    prop_oneof![
        element().prop_map(Gate::Lplus),
        element().prop_map(Gate::Lminus),
        Just(Gate::Fourier),
        Just(Gate::FourierInv),
        (0usize..3).prop_map(|k| Gate::Zk { zlist: vec![Element::E, Element::CP, Element::CM], k }),
    ]
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        (1u32..=3, gate()).prop_map(|(q, g)| Op::Single(q, g)),
        (1u32..=3, 1u32..=3, slot(), slot())
            .prop_filter("distinct", |(a, b, _, _)| a != b)
            .prop_map(|(a, b, l, r)| Op::Ctrl(a, b, Family { left: l, right: r })),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn group_axioms(a in element(), b in element(), c in element()) {
        prop_assert_eq!((a * b) * c, a * (b * c));
        prop_assert_eq!(a * a.inv(), Element::E);
        prop_assert_eq!((a * b).inv(), b.inv() * a.inv());
        prop_assert_eq!(a.conj_by(b).class_tag(), a.class_tag());
    }

    #[test]
    fn regular_action_is_a_representation(a in element(), b in element()) {
        prop_assert_eq!(&regular_action(Side::Left, a) * &regular_action(Side::Left, b), regular_action(Side::Left, a * b));
        prop_assert_eq!(&regular_action(Side::Right, a) * &regular_action(Side::Right, b), regular_action(Side::Right, a * b));
        let m = &irrep_matrix(Irrep::R2, a) * &irrep_matrix(Irrep::R2, b);
        prop_assert!(m.approx_eq(&irrep_matrix(Irrep::R2, a * b), 1e-12));
    }

    #[test]
    fn sparse_register_matches_dense(a in amps(216), ops in prop::collection::vec(op(), 1..8)) {
        let mut s = random_state(3, &a);
        let mut d = DenseState::from_sparse(&s).unwrap();
        for o in &ops {
            match o {
                Op::Single(q, g) => {
                    s = s.apply_single(QuditId(*q), &g.matrix()).unwrap();
                    d = d.apply_single(QuditId(*q), &g.matrix()).unwrap();
                }
                Op::Ctrl(c, t, f) => {
                    s = s.apply_controlled(QuditId(*c), QuditId(*t), &f.matrices()).unwrap();
                    d = d.apply_controlled(QuditId(*c), QuditId(*t), &f.matrices()).unwrap();
                }
            }
        }
        prop_assert!((d.fidelity_with(&s).unwrap() - 1.0).abs() < 1e-10);
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn gauge_transforms_compose(a in amps(36), g in element(), h in element()) {
        let lat = Lattice::named("braid-min-reduced").unwrap();
        let q = lat.edge_qudits();
        let mut terms = Vec::new();
        for (i, &c) in a.iter().enumerate() {
            let cfg: Vec<Element> = qdsim::dense::config_of(i * 6 % 216, 3).into_iter().map(Element::from_index).collect();
            terms.push((cfg, c));
        }
        let s = SparseState::from_terms(&q, terms).unwrap();
        for v in lat.vertex_ids() {
            let two = lat.gauge_transform(&lat.gauge_transform(&s, h, v).unwrap(), g, v).unwrap();
            let one = lat.gauge_transform(&s, g * h, v).unwrap();
            prop_assert!((two.inner(&one).unwrap() - C64::new(s.norm_sqr(), 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn ribbon_sparse_matches_dense(seed in 0u64..1000, h in element(), g in element(), which in 0usize..2) {
        let lat = Lattice::named("braid-min").unwrap();
        let r = Ribbon::named(&lat, ["r01", "loop0"][which]).unwrap();
        let mut rng = rng_from_seed(seed);
        let n = lat.edges().len();
        let a: Vec<C64> = (0..6usize.pow(n as u32)).map(|_| {
            use rand::Rng;
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        }).collect();
        let s = random_state(n, &a);
        let d = DenseState::from_sparse(&s).unwrap();
        let sp = apply_ribbon(&s, h, g, &r).unwrap();
        let de = dense_ribbon(&lat, &d, &r, &[(h, g, ONE)]).unwrap();
        let sd = DenseState::from_sparse(&sp.aligned_to(d.ids()).unwrap()).unwrap();
        let diff: f64 = sd.amps().iter().zip(de.amps()).map(|(x, y)| (x - y).norm_sqr()).sum();
        prop_assert!(diff < 1e-20);
    }

    #[test]
    fn program_text_is_a_fixpoint(ops in prop::collection::vec(op(), 0..10), meas in 0usize..3, k in element().prop_filter("not e", |k| !k.is_identity())) {
        let mut b = Builder::new(10);
        let a = b.alloc(Role::VertexAncilla, Vector::Fourier { zlist: vec![Element::E, k], k: 1 });
        for o in &ops {
            match o {
                Op::Single(q, g) => b.gate(QuditId(*q), g.clone()),
                Op::Ctrl(c, t, f) => b.ctrl(QuditId(*c), QuditId(*t), *f),
            }
        }
        let basis = [Basis::Group, Basis::Fourier(vec![Element::E, Element::CP, Element::CM]), Basis::Fourier(vec![k])][meas].clone();
        let m = b.measure(a, basis);
        b.cond(m, 0..2, |v, sub| sub.gate(QuditId(1), Gate::Lplus(Element::from_index(v))));
        b.release(a);
        let p = b.finish();
        let text = p.to_text();
        let back = GateProgram::parse(&text).unwrap();
        prop_assert_eq!(back.to_text(), text);
        prop_assert_eq!(back.static_counts(), p.static_counts());
    }

    #[test]
    fn sampled_runs_replay_from_seed(seed in 0u64..1000) {
        let mut b = Builder::new(10);
        let a = b.alloc(Role::VertexAncilla, Vector::uniform());
        b.ctrl(a, QuditId(1), Family::LPLUS);
        let m = b.measure(QuditId(1), Basis::Fourier(vec![Element::E, Element::CP, Element::CM]));
        b.release(a);
        let p = b.finish();
        let s = SparseState::basis_state(&[Qudit::edge(1)], &[Element::E]).unwrap();
        let x = Executor::new().run_sampled(&p, s.clone(), &mut rng_from_seed(seed)).unwrap();
        let y = Executor::new().run_sampled(&p, s, &mut rng_from_seed(seed)).unwrap();
        prop_assert_eq!(x.outcomes[&m], y.outcomes[&m]);
    }

    #[test]
    fn report_rounding_is_idempotent(x in -1e3f64..1e3) {
        let r = qdsim::demos::round12(x);
        prop_assert_eq!(qdsim::demos::round12(r), r);
        prop_assert!((r - x).abs() <= 1e-11 * x.abs().max(1e-3));
    }
}
