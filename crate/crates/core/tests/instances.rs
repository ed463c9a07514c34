mod common;

use common::{matrix_distance, rng, sup_distance};
use ilb_evolve::chain::{field_apply, include, right_translate};
use ilb_evolve::instances::{CorruptedChain, DiffIntervalChain};
use ilb_evolve::{
    evolve, make_instance, validate_chain, Chain, ControlSignal, Error, SolverConfig,
};

#[test]
fn registry_parses_names() {
    let a = make_instance("abelian:3").unwrap();
    assert_eq!((a.point_dim(), a.algebra_dim(), a.loss()), (3, 3, 0));
    let s = make_instance("so3").unwrap();
    assert_eq!((s.point_dim(), s.algebra_dim()), (9, 3));
    let l = make_instance("loop:16,4").unwrap();
    assert_eq!(l.top_level(), 4);
    assert_eq!(l.point_dim(), 4 * 33);
    let d = make_instance("diffint:65,3").unwrap();
    assert_eq!((d.point_dim(), d.top_level()), (65, 3));
    assert_eq!(d.loss(), 1);

    assert!(matches!(
        make_instance("torus:2"),
        Err(Error::UnknownInstance(_))
    ));
    assert!(matches!(
        make_instance("loop:1,4"),
        Err(Error::InvalidParams(_))
    ));
    assert!(matches!(
        make_instance("diffint:8,2"),
        Err(Error::InvalidParams(_))
    ));
    assert!(matches!(
        make_instance("gl:x"),
        Err(Error::InvalidParams(_))
    ));
    assert!(matches!(
        make_instance("loop"),
        Err(Error::InvalidParams(_))
    ));
}

#[test]
fn exponentials() {
    let so3 = make_instance("so3").unwrap();
    assert_eq!(so3.exp(&[0.0; 3]).unwrap(), so3.identity());
    let r = so3.exp(&[0.0, 0.0, std::f64::consts::FRAC_PI_2]).unwrap();
    let expected = [0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0];
    assert!(sup_distance(&r, &expected) <= 1e-14);

    let ab = make_instance("abelian:2").unwrap();
    assert_eq!(ab.exp(&[1.5, -2.0]).unwrap(), vec![1.5, -2.0]);

    let lp = make_instance("loop:4,2").unwrap();
    assert!(matches!(
        lp.exp(&vec![0.0; lp.algebra_dim()]),
        Err(Error::Unsupported { .. })
    ));
}

#[test]
fn inverses() {
    for name in ["so3", "gl:3", "abelian:2", "loop:8,2", "diffint:33,2"] {
        let chain = make_instance(name).unwrap();
        let e = chain.identity();
        assert!(
            sup_distance(&chain.invert(&e).unwrap(), &e) <= 1e-14,
            "{name}"
        );
    }
    let gl = make_instance("gl:3").unwrap();
    let mut r = rng(3);
    for _ in 0..20 {
        let a = gl.sample_point(1, &mut r, 0.8);
        let inv = gl.invert(&a).unwrap();
        assert!(matrix_distance(gl.as_ref(), &gl.multiply(&a, &inv), &gl.identity()) <= 1e-12);
    }
}

#[test]
fn diffeo_inverse_of_square_matches_root() {
    let chain = DiffIntervalChain::new(129, 2).unwrap();
    let x: Vec<f64> = chain.nodes().iter().map(|t| t * t).collect();
    let inv = chain.invert(&x).unwrap();
    for (t, y) in chain.nodes().iter().zip(&inv) {
        assert!((y - t.sqrt()).abs() <= 1e-6, "{t}: {y}");
    }
}

#[test]
fn right_translation_examples() {
    let gl = make_instance("gl:2").unwrap();
    let a = vec![1.0, 2.0, 0.5, 3.0];
    let b = vec![0.0, 1.0, -1.0, 2.0];
    assert_eq!(
        right_translate(gl.as_ref(), 1, 2, &a, &b).unwrap(),
        vec![-2.0, 5.0, -3.0, 6.5]
    );
    assert_eq!(
        right_translate(gl.as_ref(), 1, 2, &a, &gl.identity()).unwrap(),
        include(gl.as_ref(), 2, 1, &a).unwrap()
    );
    assert!(right_translate(gl.as_ref(), 2, 1, &a, &b).is_err());

    let diff = make_instance("diffint:33,3").unwrap();
    let x = diff.identity();
    assert!(right_translate(diff.as_ref(), 2, 2, &x, &x).is_err());
    assert!(right_translate(diff.as_ref(), 2, 3, &x, &x).is_ok());
}

#[test]
fn translation_composition_laws() {
    let chain = make_instance("loop:8,4").unwrap();
    let mut r = rng(17);
    for _ in 0..10 {
        let x = chain.sample_point(4, &mut r, 0.4);
        let g = chain.sample_point(1, &mut r, 0.4);
        let h = chain.sample_point(2, &mut r, 0.4);
        let direct = right_translate(chain.as_ref(), 1, 4, &x, &g).unwrap();
        let via = right_translate(
            chain.as_ref(),
            1,
            3,
            &include(chain.as_ref(), 4, 3, &x).unwrap(),
            &g,
        )
        .unwrap();
        assert_eq!(direct, via);

        let composed = right_translate(
            chain.as_ref(),
            1,
            2,
            &right_translate(chain.as_ref(), 2, 4, &x, &h).unwrap(),
            &g,
        )
        .unwrap();
        let hg = chain.multiply(&h, &g);
        let once = right_translate(chain.as_ref(), 1, 4, &x, &hg).unwrap();
        assert!(chain.norm(1, &sub(&composed, &once)) <= 1e-5);
    }
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[test]
fn field_examples() {
    let gl = make_instance("gl:2").unwrap();
    let a = vec![1.0, 2.0, 0.5, 3.0];
    let v = vec![0.0, 1.0, -1.0, 2.0];
    assert_eq!(
        field_apply(gl.as_ref(), 1, &a, &v).unwrap(),
        vec![0.5, 3.0, 0.0, 4.0]
    );
    assert_eq!(field_apply(gl.as_ref(), 1, &gl.identity(), &v).unwrap(), v);

    let ab = make_instance("abelian:2").unwrap();
    assert_eq!(
        field_apply(ab.as_ref(), 1, &[5.0, 6.0], &[1.0, -1.0]).unwrap(),
        vec![1.0, -1.0]
    );
    assert!(field_apply(ab.as_ref(), 1, &[5.0], &[1.0, -1.0]).is_err());
}

#[test]
fn loop_product_is_truncated_convolution() {
    // a(θ) = [[1 + cos θ, 0], [0, 1]], b(θ) = [[cos θ, sin θ], [0, 1]]
    let chain = make_instance("loop:4,2").unwrap();
    let mut a = chain.identity();
    a[4] = 1.0;
    let mut b = vec![0.0; chain.point_dim()];
    b[3] = 1.0;
    b[4] = 1.0;
    b[8 + 1] = 1.0;
    let p = chain.multiply(&a, &b);
    // (1 + cos)cos = ½ + cos + ½cos 2θ ; (1 + cos)sin = sin + ½ sin 2θ
    let mut expected = vec![0.0; chain.point_dim()];
    expected[0] = 0.5;
    expected[3] = 1.0;
    expected[4] = 1.0;
    expected[8 + 1] = 1.0;
    expected[12] = 0.5;
    expected[16 + 1] = 0.5;
    assert!(sup_distance(&p, &expected) <= 1e-14);
}

#[test]
fn loop_norms_increase_with_level() {
    let chain = make_instance("loop:16,4").unwrap();
    let mut r = rng(4);
    for _ in 0..50 {
        let x = chain.sample_direction(4, &mut r);
        for n in 1..4 {
            assert!(chain.norm(n + 1, &x) >= chain.norm(n, &x));
        }
    }
}

#[test]
fn constant_chains_pass_validation() {
    for name in ["abelian:3", "so3", "gl:2", "gl:4"] {
        let rep = validate_chain(make_instance(name).unwrap().as_ref(), 100, 1);
        let worst = rep
            .identity_law
            .max(rep.associativity)
            .max(rep.field_linearity)
            .max(rep.field_identity);
        assert!(worst <= 1e-12, "{name}: {rep:?}");
        assert!(rep.inclusion_constants.iter().all(|c| *c <= 1.0 + 1e-12));
    }
}

#[test]
fn loop_validation_reports_truncation() {
    let rep = validate_chain(make_instance("loop:16,4").unwrap().as_ref(), 200, 5);
    assert_eq!(rep.associativity_within_bound, Some(true));
    assert!(rep.associativity > 0.0);
    assert!(rep.associativity <= rep.associativity_bound.unwrap());
}

#[test]
fn inclusion_constants_are_stable_under_more_samples() {
    for name in ["loop:16,4", "diffint:65,3"] {
        let chain = make_instance(name).unwrap();
        let a = validate_chain(chain.as_ref(), 100, 2).inclusion_constants;
        let b = validate_chain(chain.as_ref(), 200, 2).inclusion_constants;
        for (x, y) in a.iter().zip(&b) {
            assert!(
                x.is_finite() && (x - y).abs() <= 0.1 * x,
                "{name}: {x} vs {y}"
            );
        }
    }
}

#[test]
fn corrupted_product_is_flagged() {
    let bad = CorruptedChain::new(make_instance("so3").unwrap(), 1e-3);
    let rep = validate_chain(&bad, 50, 1);
    assert!(rep.identity_law > 1e-6, "{rep:?}");
}

#[test]
fn diffeo_flow_preserves_monotonicity() {
    let chain = DiffIntervalChain::new(65, 3).unwrap();
    let v1 = chain.sine_series(&[0.3, -0.04]);
    let v2 = chain.sine_series(&[-0.2, 0.0, 0.01]);
    let c = ControlSignal::step(vec![0.0, 0.5, 1.0], vec![v1, v2]).unwrap();
    let mut cfg = SolverConfig::for_chain(&chain);
    cfg.grid_cells = 16;
    let rep = evolve(&chain, 1, &c, &cfg).unwrap();
    assert!(rep.n > 1);
    for p in &rep.trajectory.points {
        assert_eq!(p[0], 0.0);
        assert_eq!(*p.last().unwrap(), 1.0);
        assert!(p.windows(2).all(|w| w[1] > w[0]));
    }
}
