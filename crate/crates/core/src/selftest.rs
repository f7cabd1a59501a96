//! Seeded randomized invariant suite, shared by `cargo test` and the CLI
//! `selftest` command. Same seed, same instances, byte-identical report.

use crate::coefficients::ArtinRing;
use crate::dgla::{self, Gla};
use crate::testutil::Rng;

pub mod gen {
    //! Random generators for valid instances: DGLAs, Maurer-Cartan elements,
    //! gauge logs. Validity is by construction (families whose axioms hold
    //! identically, composed by direct sum and basis change).

    use std::collections::BTreeMap;

    use num_traits::Zero;

    use crate::coefficients::{rat, ArtinRing, RElement, Rational};
    use crate::dgla::{gauge_act_unchecked, Dgla, DglaElement, Gla, RMat};
    use crate::linalg::Mat;
    use crate::testutil::Rng;

    /// Endomorphism DGLA of the two-term complex `W^0 -> W^1` (dims 1,1) with
    /// differential `lam`: degrees -1, 0, 1 with dims 1, 2, 1. The 2x2 matrix
    /// representation (`W^0` first) is faithful.
    pub fn end_complex_dgla(ring: ArtinRing, lam: i64) -> Dgla {
        let mut dims = BTreeMap::new();
        dims.insert(-1, 1); // e-: W^1 -> W^0
        dims.insert(0, 2); // a on W^0, b on W^1
        dims.insert(1, 1); // e+: W^0 -> W^1
        let mut g = Dgla::new(ring, dims).unwrap();
        g.set_bracket_pair(0, 1, 0, 0, &[(0, rat(-1))]).unwrap(); // [a,e+] = -e+
        g.set_bracket_pair(0, 1, 1, 0, &[(0, rat(1))]).unwrap(); // [b,e+] = e+
        g.set_bracket_pair(0, -1, 0, 0, &[(0, rat(1))]).unwrap(); // [a,e-] = e-
        g.set_bracket_pair(0, -1, 1, 0, &[(0, rat(-1))]).unwrap(); // [b,e-] = -e-
                                                                   // odd·odd graded commutator: [e+,e-] = e+e- + e-e+ = a + b
        g.set_bracket_pair(1, -1, 0, 0, &[(0, rat(1)), (1, rat(1))])
            .unwrap();
        // d = [d_W, -]: d(e-) = lam(a+b), d(a) = lam e+, d(b) = -lam e+
        g.set_diff_block(-1, Mat::from_rows(vec![vec![rat(lam)], vec![rat(lam)]]))
            .unwrap();
        g.set_diff_block(0, Mat::from_rows(vec![vec![rat(lam), rat(-lam)]]))
            .unwrap();
        g
    }

    /// Heisenberg algebra in degree 0 ([x,y] = z) acting on a 2-dimensional
    /// degree-1 module by [x,e] = f; d = 0.
    pub fn heisenberg_module_dgla(ring: ArtinRing) -> Dgla {
        let mut dims = BTreeMap::new();
        dims.insert(0, 3);
        dims.insert(1, 2);
        let mut g = Dgla::new(ring, dims).unwrap();
        g.set_bracket_pair(0, 0, 0, 1, &[(2, rat(1))]).unwrap();
        g.set_bracket_pair(0, 1, 0, 0, &[(1, rat(1))]).unwrap();
        g
    }

    /// Free nilpotent Lie algebra of class 3 on two generators, in degree 0:
    /// basis x, y, z=[x,y], u=[x,z], v=[y,z]; all length-4 brackets vanish.
    pub fn free_nilpotent3_dgla(ring: ArtinRing) -> Dgla {
        let mut dims = BTreeMap::new();
        dims.insert(0, 5);
        let mut g = Dgla::new(ring, dims).unwrap();
        g.set_bracket_pair(0, 0, 0, 1, &[(2, rat(1))]).unwrap(); // [x,y] = z
        g.set_bracket_pair(0, 0, 0, 2, &[(3, rat(1))]).unwrap(); // [x,z] = u
        g.set_bracket_pair(0, 0, 1, 2, &[(4, rat(1))]).unwrap(); // [y,z] = v
        g
    }

    /// Left-multiplication representation of `free_nilpotent3_dgla` on the
    /// tensor algebra truncated at word length 3 (dimension 15); faithful on
    /// brackets of length <= 3.
    pub fn free_nilpotent3_rep(ring: ArtinRing, e: &DglaElement) -> RMat {
        let mut words: Vec<Vec<u8>> = vec![vec![]];
        for len in 1..=3usize {
            for code in 0..(1usize << len) {
                let w: Vec<u8> = (0..len).map(|i| ((code >> i) & 1) as u8).collect();
                words.push(w);
            }
        }
        let index: std::collections::HashMap<Vec<u8>, usize> = words
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, w)| (w, i))
            .collect();
        let dim = words.len();
        let letter_mat = |l: u8| -> Mat {
            let mut m = Mat::zeros(dim, dim);
            for (j, w) in words.iter().enumerate() {
                if w.len() >= 3 {
                    continue;
                }
                let mut nw = vec![l];
                nw.extend(w.iter().copied());
                let i = index[&nw];
                *m.at_mut(i, j) = rat(1);
            }
            m
        };
        let mx = letter_mat(0);
        let my = letter_mat(1);
        let comm = |a: &Mat, b: &Mat| a.mul(b).sub(&b.mul(a));
        let mz = comm(&mx, &my);
        let mu = comm(&mx, &mz);
        let mv = comm(&my, &mz);
        let reps = [mx, my, mz, mu, mv];
        let mut out = RMat::zeros(ring, dim, dim);
        for (k, c) in e.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for i in 0..dim {
                for j in 0..dim {
                    let s = reps[k].at(i, j);
                    if !s.is_zero() {
                        let v = out.at(i, j).add(&c.scale(s)).unwrap();
                        out.set(i, j, v);
                    }
                }
            }
        }
        out
    }

    /// Random abelian DGLA in degrees -1..2 with d^2 = 0 by construction.
    fn random_abelian(rng: &mut Rng, ring: ArtinRing) -> Dgla {
        let d_m1 = 1 + rng.usize_below(2);
        let d0 = 1 + rng.usize_below(2);
        let d1 = 1 + rng.usize_below(2);
        let d2 = rng.usize_below(2);
        let mut dims = BTreeMap::new();
        dims.insert(-1, d_m1);
        dims.insert(0, d0);
        dims.insert(1, d1);
        dims.insert(2, d2);
        let mut g = Dgla::new(ring, dims).unwrap();
        let mut m0 = Mat::zeros(d1, d0);
        for i in 0..d1 {
            for j in 0..d0 {
                *m0.at_mut(i, j) = rng.rational(2);
            }
        }
        // d_{-1}: columns inside ker(d_0)
        let kernel = m0.nullspace();
        let mut dm1 = Mat::zeros(d0, d_m1);
        for j in 0..d_m1 {
            for v in &kernel {
                let c = rng.rational(2);
                for i in 0..d0 {
                    let w = dm1.at(i, j).clone() + &c * &v[i];
                    *dm1.at_mut(i, j) = w;
                }
            }
        }
        // d_1: rows from the left-annihilator of im(d_0)
        let mut m0t = Mat::zeros(d0, d1);
        for i in 0..d1 {
            for j in 0..d0 {
                *m0t.at_mut(j, i) = m0.at(i, j).clone();
            }
        }
        let lann = m0t.nullspace();
        let mut m1 = Mat::zeros(d2, d1);
        for i in 0..d2 {
            for w in &lann {
                let c = rng.rational(2);
                for j in 0..d1 {
                    let v = m1.at(i, j).clone() + &c * &w[j];
                    *m1.at_mut(i, j) = v;
                }
            }
        }
        g.set_diff_block(-1, dm1).unwrap();
        g.set_diff_block(0, m0).unwrap();
        g.set_diff_block(1, m1).unwrap();
        g
    }

    /// Random valid DGLA instance (dims <= 3 per degree, nilpotency <= max_order).
    pub fn random_dgla(rng: &mut Rng, max_order: usize) -> Dgla {
        let order = 2 + rng.usize_below(max_order.saturating_sub(1));
        let ring = ArtinRing::new(order).unwrap();
        let g = match rng.usize_below(4) {
            0 => random_abelian(rng, ring),
            1 => heisenberg_module_dgla(ring),
            2 => end_complex_dgla(ring, rng.i64_range(-2, 2)),
            _ => free_nilpotent3_dgla(ring),
        };
        debug_assert!(g.validate().is_empty());
        g
    }

    /// Random degree-0 element with coefficients in m.
    pub fn random_gauge_log(g: &Dgla, rng: &mut Rng) -> DglaElement {
        random_m_element(g, rng, 0)
    }

    /// Random degree -1 element with coefficients in m.
    pub fn random_two_log(g: &Dgla, rng: &mut Rng) -> DglaElement {
        random_m_element(g, rng, -1)
    }

    pub fn random_m_element(g: &Dgla, rng: &mut Rng, degree: i64) -> DglaElement {
        let coeffs = (0..g.dim(degree))
            .map(|_| rng.m_element(g.ring(), 2))
            .collect();
        g.element(degree, coeffs).unwrap()
    }

    /// Random Maurer-Cartan element: a gauge translate of a Maurer-Cartan
    /// seed (zero, or `t v` for a d-closed degree-1 `v` with `[v,v] = 0`).
    pub fn random_mc(g: &Dgla, rng: &mut Rng) -> DglaElement {
        let mut seed = g.zero(1);
        if rng.bool() {
            for _ in 0..4 {
                let cand_coeffs: Vec<RElement> = (0..g.dim(1))
                    .map(|_| g.ring().monomial(1, rng.rational(2)))
                    .collect();
                let cand = g.element(1, cand_coeffs).unwrap();
                if g.is_zero(&g.d(&cand)) && g.is_zero(&g.bracket(&cand, &cand)) {
                    seed = cand;
                    break;
                }
            }
        }
        let x = random_gauge_log(g, rng);
        gauge_act_unchecked(g, &x, &seed)
    }

    #[allow(unused)]
    fn keep_rational_import(_: Rational) {}
}

/// One property line of the selftest report.
#[derive(Debug, Clone)]
pub struct PropertyResult {
    pub name: String,
    pub instances: usize,
    pub failures: usize,
    pub witness: Option<String>,
}

/// Aggregate outcome of the seeded invariant suite.
#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub seed: u64,
    pub properties: Vec<PropertyResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.properties.iter().all(|p| p.failures == 0)
    }
}

fn property<F>(name: &str, instances: usize, mut body: F) -> PropertyResult
where
    F: FnMut(usize) -> Result<(), String>,
{
    let mut failures = 0;
    let mut witness = None;
    for i in 0..instances {
        if let Err(w) = body(i) {
            failures += 1;
            if witness.is_none() {
                witness = Some(format!("instance {i}: {w}"));
            }
        }
    }
    PropertyResult {
        name: name.to_string(),
        instances,
        failures,
        witness,
    }
}

/// Run the randomized invariant suite with the given seed.
pub fn run_suite(seed: u64) -> SuiteReport {
    let mut props = Vec::new();

    // --- coefficients -----------------------------------------------------
    props.push(property("coefficients/ring-axioms", 120, |i| {
        let mut rng = Rng::new(seed ^ (i as u64).wrapping_mul(0x9E3779B9));
        let ring = ArtinRing::new(1 + i % 5).unwrap();
        let a = rng.relement(ring, 3);
        let b = rng.relement(ring, 3);
        let c = rng.relement(ring, 3);
        let assoc = a.mul(&b).unwrap().mul(&c).unwrap() == a.mul(&b.mul(&c).unwrap()).unwrap();
        let dist = a.mul(&b.add(&c).unwrap()).unwrap()
            == a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
        if assoc && dist {
            Ok(())
        } else {
            Err(format!("a={a} b={b} c={c}"))
        }
    }));

    props.push(property("coefficients/inverse", 60, |i| {
        let mut rng = Rng::new(seed ^ 0xAA55 ^ ((i as u64) << 3));
        let ring = ArtinRing::new(1 + i % 5).unwrap();
        let mut a = rng.relement(ring, 3);
        if a.constant_term() == crate::coefficients::rat(0) {
            a = a.add(&ring.one()).unwrap();
        }
        if a.mul(&a.invert().map_err(|e| e.to_string())?)
            .unwrap()
            .is_one()
        {
            Ok(())
        } else {
            Err(format!("a = {a}"))
        }
    }));

    // --- dgla / Deligne 2-groupoid ----------------------------------------
    props.push(property("dgla/gauge-group-action", 70, |i| {
        let mut rng = Rng::new(seed ^ 0x6A6A ^ ((i as u64) << 1));
        let g = gen::random_dgla(&mut rng, 4);
        let x = gen::random_gauge_log(&g, &mut rng);
        let y = gen::random_gauge_log(&g, &mut rng);
        let gamma = gen::random_mc(&g, &mut rng);
        let xy = dgla::bch_plain(&g, &x, &y).map_err(|e| e.to_string())?;
        let lhs = dgla::gauge_act(&g, &xy, &gamma).map_err(|e| e.to_string())?;
        let inner = dgla::gauge_act(&g, &y, &gamma).map_err(|e| e.to_string())?;
        let rhs = dgla::gauge_act(&g, &x, &inner).map_err(|e| e.to_string())?;
        if lhs == rhs {
            Ok(())
        } else {
            Err("gauge action is not a group action".into())
        }
    }));

    props.push(property("dgla/mc-preservation+conjugation", 70, |i| {
        let mut rng = Rng::new(seed ^ 0x3C3C ^ ((i as u64) << 2));
        let g = gen::random_dgla(&mut rng, 4);
        let x = gen::random_gauge_log(&g, &mut rng);
        let gamma = gen::random_mc(&g, &mut rng);
        let moved = dgla::gauge_act(&g, &x, &gamma).map_err(|e| e.to_string())?;
        if !dgla::is_mc(&g, &moved) {
            return Err("gauge action does not preserve MC".into());
        }
        if !g
            .check_conjugation(&x, &gamma, &moved)
            .map_err(|e| e.to_string())?
        {
            return Err("conjugation identity fails".into());
        }
        Ok(())
    }));

    props.push(property("dgla/bch-associativity", 50, |i| {
        let mut rng = Rng::new(seed ^ 0xB0B ^ ((i as u64) << 4));
        let g = gen::random_dgla(&mut rng, 4);
        let x = gen::random_gauge_log(&g, &mut rng);
        let y = gen::random_gauge_log(&g, &mut rng);
        let z = gen::random_gauge_log(&g, &mut rng);
        let a = dgla::bch_plain(&g, &x, &dgla::bch_plain(&g, &y, &z).unwrap()).unwrap();
        let b = dgla::bch_plain(&g, &dgla::bch_plain(&g, &x, &y).unwrap(), &z).unwrap();
        if a == b {
            Ok(())
        } else {
            Err("BCH associativity fails".into())
        }
    }));

    props.push(property("dgla/interchange-law", 40, |i| {
        let mut rng = Rng::new(seed ^ 0x1C8A ^ ((i as u64) << 5));
        let g = gen::random_dgla(&mut rng, 3);
        let gamma1 = gen::random_mc(&g, &mut rng);
        let x12 = gen::random_gauge_log(&g, &mut rng);
        let gamma2 = dgla::gauge_act(&g, &x12, &gamma1).unwrap();
        let x23 = gen::random_gauge_log(&g, &mut rng);
        let gamma3 = dgla::gauge_act(&g, &x23, &gamma2).unwrap();
        let t12 = gen::random_two_log(&g, &mut rng);
        let s12 = gen::random_two_log(&g, &mut rng);
        let t23 = gen::random_two_log(&g, &mut rng);
        let s23 = gen::random_two_log(&g, &mut rng);
        let y23 = dgla::two_morphism_act(&g, &gamma3, &t23, &x23).unwrap();
        let vert12 = dgla::vertical_compose(&g, &gamma2, &s12, &t12).unwrap();
        let vert23 = dgla::vertical_compose(&g, &gamma3, &s23, &t23).unwrap();
        let lhs = dgla::horizontal_compose(&g, &gamma3, &vert23, &x23, &vert12).unwrap();
        let h1 = dgla::horizontal_compose(&g, &gamma3, &t23, &x23, &t12).unwrap();
        let h2 = dgla::horizontal_compose(&g, &gamma3, &s23, &y23, &s12).unwrap();
        let rhs = dgla::vertical_compose(&g, &gamma3, &h2, &h1).unwrap();
        if lhs == rhs {
            Ok(())
        } else {
            Err("interchange law fails".into())
        }
    }));

    props.push(property("dgla/twisted-bracket-lie", 50, |i| {
        let mut rng = Rng::new(seed ^ 0x7715 ^ ((i as u64) << 6));
        let g = gen::random_dgla(&mut rng, 4);
        let gamma = gen::random_mc(&g, &mut rng);
        let a = gen::random_two_log(&g, &mut rng);
        let b = gen::random_two_log(&g, &mut rng);
        let c = gen::random_two_log(&g, &mut rng);
        let ab = dgla::twisted_bracket(&g, &gamma, &a, &b).unwrap();
        let ba = dgla::twisted_bracket(&g, &gamma, &b, &a).unwrap();
        if !g.is_zero(&g.add(&ab, &ba)) {
            return Err("twisted antisymmetry fails".into());
        }
        let bc = dgla::twisted_bracket(&g, &gamma, &b, &c).unwrap();
        let j1 = dgla::twisted_bracket(&g, &gamma, &a, &bc).unwrap();
        let j2 = dgla::twisted_bracket(&g, &gamma, &ab, &c).unwrap();
        let ac = dgla::twisted_bracket(&g, &gamma, &a, &c).unwrap();
        let j3 = dgla::twisted_bracket(&g, &gamma, &b, &ac).unwrap();
        if j1 == g.add(&j2, &j3) {
            Ok(())
        } else {
            Err("twisted Jacobi fails".into())
        }
    }));

    // --- hochschild ---------------------------------------------------------
    props.push(property("hochschild/delta-squared+jacobi", 30, |i| {
        use crate::hochschild::{FinAlgebra, HochschildCochain};
        let mut rng = Rng::new(seed ^ 0x40C ^ ((i as u64) << 2));
        let a = if i % 2 == 0 {
            FinAlgebra::dual_numbers()
        } else {
            FinAlgebra::q_times_q()
        };
        let ring = ArtinRing::new(2).unwrap();
        let arity = 1 + i % 2;
        let mut c = HochschildCochain::zero(ring, a.dim(), arity);
        let mut d = HochschildCochain::zero(ring, a.dim(), 2);
        for slot in 0..a.dim().pow(arity as u32) * a.dim() {
            let _ = slot;
        }
        fill_cochain(&mut c, &mut rng);
        fill_cochain(&mut d, &mut rng);
        if !c.differential(&a).differential(&a).is_zero() {
            return Err("δ² != 0".into());
        }
        let sign = if ((arity as i64 - 1) * (2 - 1)).rem_euclid(2) == 0 {
            crate::coefficients::rat(1)
        } else {
            crate::coefficients::rat(-1)
        };
        let anti = c.gerstenhaber(&d).add(&d.gerstenhaber(&c).scale_rat(&sign));
        if !anti.is_zero() {
            return Err("graded antisymmetry fails".into());
        }
        Ok(())
    }));

    props.push(property("hochschild/star-mc-dictionary", 20, |i| {
        use crate::dgla::{gauge_act, mc_residual};
        use crate::hochschild::{
            mu_from_star, star_from_mc, FinAlgebra, HochschildCochain, HochschildDgla,
        };
        let mut rng = Rng::new(seed ^ 0x57A ^ ((i as u64) << 3));
        let a = FinAlgebra::dual_numbers();
        let ring = ArtinRing::new(2 + i % 2).unwrap();
        let h = HochschildDgla::new(a.clone(), ring, 3);
        let mut x = HochschildCochain::zero(ring, a.dim(), 1);
        fill_cochain_m(&mut x, &mut rng);
        let gamma = gauge_act(&h, &x, &h.zero(1)).map_err(|e| e.to_string())?;
        let s = star_from_mc(&a, ring, &gamma).map_err(|e| e.to_string())?;
        if !s.is_associative() {
            return Err("gauge-translate star product not associative".into());
        }
        if mu_from_star(&s) != gamma {
            return Err("roundtrip failed".into());
        }
        let mut b = HochschildCochain::zero(ring, a.dim(), 2);
        fill_cochain_m(&mut b, &mut rng);
        let res = mc_residual(&h, &b).map_err(|e| e.to_string())?;
        if !res.is_zero() && star_from_mc(&a, ring, &b).is_ok() {
            return Err("non-MC cochain accepted as star product".into());
        }
        Ok(())
    }));

    // --- simplicial ---------------------------------------------------------
    props.push(property("simplicial/subdivision-identities", 8, |i| {
        use crate::simplicial as sx;
        use std::rc::Rc;
        let mut rng = Rng::new(seed ^ 0x51D ^ ((i as u64) << 4));
        let dims: Vec<usize> = (0..=3).map(|_| 1 + rng.usize_below(2)).collect();
        let diffs = random_complex_for(&mut rng, &dims);
        let v = Rc::new(sx::dold_kan(&dims, &diffs).map_err(|e| e.to_string())?);
        for n in 0..=3usize {
            for b in v.normalized_basis(n) {
                let f = sx::iota(&v, n, b.clone());
                if sx::pi(&v, &f) != b {
                    return Err(format!("π∘ι != Id at level {n}"));
                }
            }
        }
        for deg in 1..=2usize {
            let f = random_hat_for(&v, deg, seed ^ i as u64);
            let hf = sx::homotopy_h(&v, &f);
            let dhf = sx::hat_differential(&v, &hf);
            let hdf = sx::homotopy_h(&v, &sx::hat_differential(&v, &f));
            let ip = sx::iota(&v, deg, sx::pi(&v, &f));
            for lam in sx::DeltaSimplex::enumerate(deg, 2) {
                let lhs: Vec<_> = ip
                    .at(&lam)
                    .iter()
                    .zip(&f.at(&lam))
                    .map(|(a, b)| a - b)
                    .collect();
                let rhs: Vec<_> = dhf
                    .at(&lam)
                    .iter()
                    .zip(&hdf.at(&lam))
                    .map(|(a, b)| {
                        let s = a + b;
                        if sx::HOMOTOPY_SIGN == 1 {
                            s
                        } else {
                            -s
                        }
                    })
                    .collect();
                if lhs != rhs {
                    return Err(format!("homotopy identity fails at degree {deg}"));
                }
            }
        }
        Ok(())
    }));

    // --- descent / gmat ------------------------------------------------------
    props.push(property("descent/cech-pseudocircle", 1, |_| {
        use crate::descent::{cech_cohomology, Cover, SheafData};
        let cover = Cover::pseudocircle_two_charts();
        let sheaf = SheafData::constant(&cover.space, 1);
        let h = cech_cohomology(&cover, &sheaf, 2).map_err(|e| e.to_string())?;
        if h == vec![1, 1, 0] {
            Ok(())
        } else {
            Err(format!("got {h:?}"))
        }
    }));

    props.push(property("gmat/gr-homotopy-valid-domain", 4, |i| {
        use crate::descent::{Cover, DescentDatum, LocalSection};
        use crate::gmat::GMat;
        use crate::hochschild::FinAlgebra;
        use std::rc::Rc;
        let mut rng = Rng::new(seed ^ 0x6A7 ^ ((i as u64) << 5));
        let cover = Rc::new(Cover::pseudocircle_two_charts());
        let datum = Rc::new(DescentDatum::trivial(
            cover,
            ArtinRing::new(2).unwrap(),
            FinAlgebra::rationals(),
        ));
        let g = GMat::new(datum, 1, 3, 3).map_err(|e| e.to_string())?;
        let level = 1 + i % 2;
        let arity = 1 + i % 2;
        let s = i % 2;
        let mut elt = g.zero_elt(level, arity as i64 - 1);
        for sec in elt.comps.iter_mut() {
            for v in sec.entries_mut() {
                *v = rng.relement(g.ring(), 1);
            }
        }
        let (mut fs, _) = g.filtration_project(&elt, s);
        if s >= 1 {
            for (li, sec) in fs.comps.iter_mut().enumerate() {
                if !g.lambda_info(level, li).lambda.arrows[0].is_injective() {
                    for v in sec.entries_mut() {
                        *v = g.ring().zero();
                    }
                }
            }
        }
        let d_fs = g.cech_differential(&fs);
        let h_d = g.acyclicity_homotopy(&d_fs, s).map_err(|e| e.to_string())?;
        let h_fs = g.acyclicity_homotopy(&fs, s).map_err(|e| e.to_string())?;
        let d_h = g.cech_differential(&h_fs);
        let slice = g.slice(level);
        let diff = slice.sub(&slice.add(&h_d, &d_h), &fs);
        for sp in 0..=s {
            let (_, gr) = g.filtration_project(&diff, sp);
            if !gr.is_zero() {
                return Err(format!("Gr^{sp} defect"));
            }
        }
        let _ = LocalSection::s_of_multi(&[0]);
        Ok(())
    }));

    // --- stacks --------------------------------------------------------------
    props.push(property("stacks/strictify-random", 6, |i| {
        use crate::descent::{Cover, DescentDatum};
        use crate::hochschild::FinAlgebra;
        use crate::stacks::{
            random_valid_stack, stack_gmat, strictify, validate_gstack, validate_one_morphism,
        };
        use std::rc::Rc;
        let mut rng = Rng::new(seed ^ 0x57C ^ ((i as u64) << 6));
        let cover = Rc::new(Cover::pseudocircle_two_charts());
        let datum = Rc::new(DescentDatum::trivial(
            cover,
            ArtinRing::new(3).unwrap(),
            FinAlgebra::rationals(),
        ));
        let g = stack_gmat(datum.clone(), 1).map_err(|e| e.to_string())?;
        let s = random_valid_stack(&g, datum, &mut rng);
        if !validate_gstack(&g, &s).is_empty() {
            return Err("random stack invalid".into());
        }
        let (out, morphism, trace) = strictify(&g, &s).map_err(|e| e.to_string())?;
        if !out.is_strict(&g) || !validate_gstack(&g, &out).is_empty() {
            return Err("strictify output invalid".into());
        }
        if !validate_one_morphism(&g, &s, &out, &morphism).is_empty() {
            return Err("strictify morphism invalid".into());
        }
        for phase in [1u8, 2] {
            if trace.rounds.iter().filter(|r| r.phase == phase).count() > 2 {
                return Err(format!("phase {phase} took more than 2 rounds"));
            }
        }
        Ok(())
    }));

    SuiteReport {
        seed,
        properties: props,
    }
}

fn fill_cochain(c: &mut crate::hochschild::HochschildCochain, rng: &mut Rng) {
    let ring = c.ring();
    let total = c.entries().len();
    for idx in 0..total {
        let v = rng.relement(ring, 2);
        c.set_flat(idx, v);
    }
}

fn fill_cochain_m(c: &mut crate::hochschild::HochschildCochain, rng: &mut Rng) {
    let ring = c.ring();
    let total = c.entries().len();
    for idx in 0..total {
        let v = rng.m_element(ring, 1);
        c.set_flat(idx, v);
    }
}

fn random_complex_for(rng: &mut Rng, dims: &[usize]) -> Vec<crate::linalg::Mat> {
    use crate::linalg::Mat;
    let mut diffs: Vec<Mat> = Vec::new();
    for k in 0..dims.len() - 1 {
        let (rows, cols) = (dims[k + 1], dims[k]);
        let m = if k == 0 {
            let mut m = Mat::zeros(rows, cols);
            for i in 0..rows {
                for j in 0..cols {
                    *m.at_mut(i, j) = rng.rational(2);
                }
            }
            m
        } else {
            let prev = &diffs[k - 1];
            let mut prev_t = Mat::zeros(prev.cols, prev.rows);
            for i in 0..prev.rows {
                for j in 0..prev.cols {
                    *prev_t.at_mut(j, i) = prev.at(i, j).clone();
                }
            }
            let lann = prev_t.nullspace();
            let mut m = Mat::zeros(rows, cols);
            for i in 0..rows {
                for w in &lann {
                    let c = rng.rational(2);
                    for j in 0..cols {
                        let v = m.at(i, j).clone() + &c * &w[j];
                        *m.at_mut(i, j) = v;
                    }
                }
            }
            m
        };
        diffs.push(m);
    }
    diffs
}

fn random_hat_for(
    v: &std::rc::Rc<crate::simplicial::CosimplicialVS>,
    degree: usize,
    salt: u64,
) -> crate::simplicial::HatCochain {
    use crate::coefficients::rat;
    use std::collections::hash_map::DefaultHasher;
    use std::hash::{Hash, Hasher};
    let vs = std::rc::Rc::clone(v);
    crate::simplicial::HatCochain::new(degree, move |lambda| {
        let mut h = DefaultHasher::new();
        lambda.hash(&mut h);
        salt.hash(&mut h);
        let mut state = h.finish() | 1;
        (0..vs.dim(*lambda.objects.last().unwrap()))
            .map(|_| {
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                rat(((state >> 33) % 7) as i64 - 3)
            })
            .collect()
    })
}
