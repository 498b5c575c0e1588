//! The twelve acceptance criteria, one test each. Every test writes a
//! single `criterion NN PASS|FAIL ...` line straight to stdout, so the
//! lines show up even while the harness captures output.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::panic::{catch_unwind, resume_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use boxlab::construct::{
    audit_density, build_hypergraph, random_colouring, AuditSpec, EdgeColouring, ProductFamilies, RandomPairFamilies,
};
use boxlab::hypercore::{
    count_boxtimes, count_ev, count_triangles_tripartite, count_vvv, find_clique, Graph, Hypergraph3, PairSet, Verdict,
    VertexSet,
};
use boxlab::palette::{standard_palette, Palette};
use boxlab::ramsey::{find_bad_triangle, search_palette_colouring, ColouringVerdict, SearchBudget};
use boxlab::reduced::{
    build_fortress, clique_to_fortress, compute_constants, find_reduced_clique, fortress_to_clique, is_reduced_clique,
    sample_base_selection, verify_fortress, BasePart, BuildOutcome, BuildParams, ConstantLimits, Fortress,
    ReducedClique, ReducedHypergraph, Selection, Stage,
};
use boxlab::systems::{extract_subsystem, q_set, KMTree, Label, Seq};
use boxlab::{Rational, Ratio};
use boxlab_cli::{lower_bound_table, run, RowStatus, RunReport};
use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Runs one criterion and reports it; a failure is re-raised after the line is written.
fn criterion(id: u32, title: &str, body: impl FnOnce() -> String) {
    let start = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(body));
    let secs = start.elapsed().as_secs_f64();
    let mut out = std::io::stdout();
    match result {
        Ok(detail) => {
            let _ = writeln!(out, "criterion {id:02} PASS {title} [{secs:.2}s] {detail}");
        }
        Err(e) => {
            let why = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            let _ = writeln!(out, "criterion {id:02} FAIL {title} [{secs:.2}s] {}", why.replace('\n', " "));
            resume_unwind(e);
        }
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let v = f();
    (v, start.elapsed())
}

fn ratio_f64(r: Ratio) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[test]
fn criterion_01_palette_densities() {
    criterion(1, "palette densities exact", || {
        let (checked, t) = timed(|| {
            let mut rows = vec![
                ("cyclic3".to_string(), Ratio::new(1, 3)),
                ("two_colour_nonmono".to_string(), Ratio::new(1, 2)),
                ("exactly_two_of_three".to_string(), Ratio::new(2, 3)),
            ];
            rows.extend((2..=8u64).map(|l| (format!("nonmono({l})"), Ratio::new(l - 1, l))));
            for (name, expected) in &rows {
                assert_eq!(standard_palette(name).unwrap().min_codegree(), *expected, "{name}");
            }
            let mut out = Vec::new();
            assert_eq!(run(["boxlab", "palette", "min-codegree", "cyclic3"], &mut out, &mut Vec::new()), 0);
            assert_eq!(String::from_utf8(out).unwrap(), "1/3\n");
            rows.len()
        });
        assert!(t < Duration::from_secs(1), "took {t:?}");
        format!("{checked} palettes")
    });
}

fn search(name: &str, k: usize, budget: &SearchBudget) -> (ColouringVerdict, Duration) {
    let pal = standard_palette(name).unwrap();
    let out = search_palette_colouring(&pal, k, budget).unwrap();
    if let ColouringVerdict::Feasible(phi) = &out.verdict {
        assert!(find_bad_triangle(phi, &pal).is_none(), "{name} K{k} witness fails re-validation");
        assert_eq!(phi.n(), k);
    }
    (out.verdict, out.elapsed)
}

#[test]
fn criterion_02_ramsey_certificates() {
    criterion(2, "palette colouring certificates", || {
        let fast = SearchBudget { threads: 1, ..SearchBudget::default() };
        for (name, k, feasible) in [("cyclic3", 5, false), ("two_colour_nonmono", 6, false), ("two_colour_nonmono", 5, true)]
        {
            let (v, t) = search(name, k, &fast);
            assert_eq!(matches!(v, ColouringVerdict::Feasible(_)), feasible, "{name} K{k}: {}", v.label());
            assert!(!matches!(v, ColouringVerdict::Unknown));
            assert!(t < Duration::from_secs(1), "{name} K{k} took {t:?}");
        }
        // slow-tagged: 10-minute budget
        let slow = SearchBudget::default();
        let (v11, t11) = search("exactly_two_of_three", 11, &slow);
        assert!(matches!(v11, ColouringVerdict::Infeasible), "K11: {}", v11.label());
        let (v10, t10) = search("exactly_two_of_three", 10, &slow);
        assert!(matches!(v10, ColouringVerdict::Feasible(_)), "K10: {}", v10.label());
        format!("slow: K11 infeasible in {:.2}s, K10 witness in {:.2}s", t11.as_secs_f64(), t10.as_secs_f64())
    });
}

#[test]
fn criterion_03_lower_bound_table() {
    criterion(3, "lower-bound table", || {
        let rows = lower_bound_table(true, &SearchBudget::default()).unwrap();
        let got: Vec<(usize, Ratio)> = rows
            .iter()
            .map(|r| match r.status {
                RowStatus::Certified { bound, .. } => (r.k, bound),
                ref s => panic!("K{} not certified: {s:?}", r.k),
            })
            .collect();
        assert_eq!(got, vec![(5, Ratio::new(1, 3)), (6, Ratio::new(1, 2)), (11, Ratio::new(2, 3))]);

        let mut out = Vec::new();
        let code = run(["boxlab", "--deterministic", "reproduce", "eq-results", "--skip-slow"], &mut out, &mut Vec::new());
        assert_eq!(code, 0);
        let rep = RunReport::parse(&String::from_utf8(out).unwrap()).unwrap();
        let lines: Vec<&str> = rep.get_all("row").collect();
        assert!(lines[0].starts_with("K5 >= 1/3"), "{lines:?}");
        assert!(lines[1].starts_with("K6 >= 1/2"), "{lines:?}");
        assert!(lines[2].starts_with("K11 skipped"), "{lines:?}");

        let mut out = Vec::new();
        let code = run(["boxlab", "--deterministic", "reproduce", "eq-results", "--include-slow"], &mut out, &mut Vec::new());
        assert_eq!(code, 0);
        let rep = RunReport::parse(&String::from_utf8(out).unwrap()).unwrap();
        assert!(rep.get_all("row").nth(2).unwrap().starts_with("K11 >= 2/3"));
        "K5 >= 1/3, K6 >= 1/2, K11 >= 2/3".to_string()
    });
}

#[test]
fn criterion_04_construction_audit() {
    criterion(4, "construction audit", || {
        let n = 300;
        let mut worst = Vec::new();
        for (name, lo, hi) in [("cyclic3", 0.30, 0.37), ("exactly_two_of_three", 0.63, 0.70)] {
            let pal = standard_palette(name).unwrap();
            for seed in 0..5 {
                let (rep, t) = timed(|| {
                    let phi = random_colouring(n, 3, seed).unwrap();
                    let h = build_hypergraph(&phi, &pal).unwrap();
                    let spec = AuditSpec {
                        colour_classes: true,
                        random_pairs: Some(RandomPairFamilies { densities: vec![0.25, 0.5, 0.75], trials: 1, seed }),
                        products: Some(ProductFamilies { trials: 2, seed }),
                        eta: 0.02,
                    };
                    audit_density(&h, &phi, &pal, &spec).unwrap()
                });
                assert!(t < Duration::from_secs(30), "{name} seed {seed} took {t:?}");
                let colour_min = rep
                    .families
                    .iter()
                    .filter(|f| f.label.starts_with("colour"))
                    .map(|f| ratio_f64(f.report.ratio().unwrap()))
                    .fold(f64::INFINITY, f64::min);
                assert!((lo..=hi).contains(&colour_min), "{name} seed {seed}: min ratio {colour_min}");
                assert!(rep.all_hold(), "{name} seed {seed}: a family misses the density bound");
                worst.push(format!("{name}/{seed}={colour_min:.3}"));
            }
        }
        worst.join(" ")
    });
}

/// Every colouring of `K_k`, checked whole.
fn colourable(palette: &Palette, k: usize) -> bool {
    let l = palette.colour_count() as u64;
    let edges: Vec<(usize, usize)> = (0..k).flat_map(|a| (a + 1..k).map(move |b| (a, b))).collect();
    let mut phi = EdgeColouring::constant(k, l as usize).unwrap();
    (0..l.pow(edges.len() as u32)).any(|code| {
        let mut c = code;
        for &(a, b) in &edges {
            phi.set(a, b, (c % l) as u8 + 1).unwrap();
            c /= l;
        }
        find_bad_triangle(&phi, palette).is_none()
    })
}

#[test]
fn criterion_05_clique_exclusion() {
    criterion(5, "clique exclusion", || {
        let pal = standard_palette("cyclic3").unwrap();
        let k4 = colourable(&pal, 4);
        assert!(!colourable(&pal, 5));
        for seed in 0..20 {
            let h = build_hypergraph(&random_colouring(60, 3, seed).unwrap(), &pal).unwrap();
            let s5 = find_clique(&h, 5, None).unwrap();
            assert!(s5.verdict.is_absent(), "seed {seed}: {}", s5.verdict.label());
            let s4 = find_clique(&h, 4, None).unwrap();
            assert_eq!(s4.verdict.witness().is_some(), k4, "seed {seed}");
        }
        format!("K5 absent on 20 seeds; K4 colourable={k4} and present={k4}")
    });
}

fn random_hypergraph(n: usize, p: f64, rng: &mut ChaCha8Rng) -> Hypergraph3 {
    let edges: Vec<[usize; 3]> = (0..n)
        .flat_map(|x| (x + 1..n).flat_map(move |y| (y + 1..n).map(move |z| [x, y, z])))
        .filter(|_| rng.gen_bool(p))
        .collect();
    Hypergraph3::from_edges(n, edges).unwrap()
}

fn random_pairs(n: usize, p: f64, rng: &mut ChaCha8Rng) -> PairSet {
    let mut s = PairSet::empty(n);
    for x in 0..n {
        for y in 0..n {
            if x != y && rng.gen_bool(p) {
                s.insert(x, y).unwrap();
            }
        }
    }
    s
}

fn random_vertices(n: usize, rng: &mut ChaCha8Rng) -> VertexSet {
    VertexSet::from_vertices(n, (0..n).filter(|_| rng.gen_bool(0.5))).unwrap()
}

fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n).filter(|m| m.count_ones() as usize == k).map(|m| (0..n).filter(|&i| m >> i & 1 == 1).collect()).collect()
}

/// All reduced cliques of order `t`.
fn reduced_cliques(h: &ReducedHypergraph, t: usize) -> Vec<ReducedClique> {
    let mut out = Vec::new();
    for j in k_subsets(h.index_count(), t) {
        let pairs: Vec<(usize, usize)> =
            j.iter().enumerate().flat_map(|(x, &a)| j[x + 1..].iter().map(move |&b| (a, b))).collect();
        let mut choice = vec![0usize; pairs.len()];
        loop {
            let v: BTreeMap<(usize, usize), usize> = pairs.iter().copied().zip(choice.iter().copied()).collect();
            let ok = k_subsets(t, 3)
                .iter()
                .map(|s| (j[s[0]], j[s[1]], j[s[2]]))
                .all(|(a, b, c)| h.contains_edge(a, b, c, v[&(a, b)], v[&(a, c)], v[&(b, c)]));
            if ok {
                out.push(ReducedClique { indices: j.clone(), vertices: v });
            }
            let Some(p) = (0..pairs.len()).find(|&i| choice[i] + 1 < h.class_size(pairs[i].0, pairs[i].1)) else {
                break;
            };
            choice[p] += 1;
            choice[..p].iter_mut().for_each(|c| *c = 0);
        }
    }
    out
}

fn random_reduced(n: usize, max_class: usize, p: f64, rng: &mut ChaCha8Rng) -> ReducedHypergraph {
    let sizes: BTreeMap<(usize, usize), usize> =
        (0..n).flat_map(|j| (0..j).map(move |i| (i, j))).map(|k| (k, rng.gen_range(1..=max_class))).collect();
    let labels = (0..n).map(Label::from).collect();
    let mut h = ReducedHypergraph::new(labels, |i, j| sizes[&(i.min(j), i.max(j))]).unwrap();
    for s in k_subsets(n, 3) {
        let (i, j, k) = (s[0], s[1], s[2]);
        for a in 0..h.class_size(i, j) {
            for b in 0..h.class_size(i, k) {
                for c in 0..h.class_size(j, k) {
                    if rng.gen_bool(p) {
                        h.insert_edge(i, j, k, a, b, c).unwrap();
                    }
                }
            }
        }
    }
    h
}

#[test]
fn criterion_06_oracle_equivalence() {
    criterion(6, "oracle equivalence", || {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let n = rng.gen_range(3..=30);
            let h = random_hypergraph(n, rng.gen_range(0.1..0.9), &mut rng);
            let (p, q) = (random_pairs(n, 0.3, &mut rng), random_pairs(n, 0.3, &mut rng));
            let (x, y, z) = (random_vertices(n, &mut rng), random_vertices(n, &mut rng), random_vertices(n, &mut rng));
            let (mut e, mut total) = (0u64, 0u64);
            for (a, b) in p.iter() {
                for c in q.row(a).iter() {
                    if b != c {
                        total += 1;
                        e += h.contains(a, b, c) as u64;
                    }
                }
            }
            let r = count_boxtimes(&h, &p, &q).unwrap();
            assert_eq!((r.e, r.total), (e, total));
            let (mut e, mut total) = (0u64, 0u64);
            for a in x.iter() {
                for (b, c) in p.iter() {
                    if a != b && a != c {
                        total += 1;
                        e += h.contains(a, b, c) as u64;
                    }
                }
            }
            let r = count_ev(&h, &x, &p).unwrap();
            assert_eq!((r.e, r.total), (e, total));
            let (mut e, mut total) = (0u64, 0u64);
            for a in x.iter() {
                for b in y.iter() {
                    for c in z.iter() {
                        if a != b && a != c && b != c {
                            total += 1;
                            e += h.contains(a, b, c) as u64;
                        }
                    }
                }
            }
            let r = count_vvv(&h, &x, &y, &z).unwrap();
            assert_eq!((r.e, r.total), (e, total));
        }
        for _ in 0..30 {
            let n = rng.gen_range(4..=20);
            let h = random_hypergraph(n, rng.gen_range(0.3..0.95), &mut rng);
            let k = rng.gen_range(3..=5.min(n));
            let brute = k_subsets(n, k).into_iter().any(|s| k_subsets(k, 3).iter().all(|t| h.contains(s[t[0]], s[t[1]], s[t[2]])));
            let got = find_clique(&h, k, None).unwrap().verdict;
            assert_eq!(got.witness().is_some(), brute);
            assert!(!matches!(got, Verdict::Unknown));
        }
        for _ in 0..40 {
            let n = rng.gen_range(3..=8);
            let h = random_reduced(n, 3, rng.gen_range(0.05..0.7), &mut rng);
            let t = rng.gen_range(3..=4);
            let all = reduced_cliques(&h, t);
            match find_reduced_clique(&h, t, None).unwrap().verdict {
                Verdict::Found(c) => assert!(all.contains(&c)),
                Verdict::Absent => assert!(all.is_empty()),
                Verdict::Unknown => panic!("unbounded search gave up"),
            }
        }
        "50 counter instances, 30 clique and 40 reduced-clique searches".to_string()
    });
}

#[test]
fn criterion_07_systems_properties() {
    criterion(7, "systems properties", || {
        for k in 1..=4 {
            for m in 1..=4 {
                let t = KMTree::product(k, m).unwrap();
                let mut nodes = BTreeSet::new();
                for l in t.leaves() {
                    nodes.extend((0..=k).map(|s| l.restrict(s)));
                }
                for c in &nodes {
                    assert_eq!(q_set(&t, c).unwrap().len(), (m - 1).pow(c.len() as u32), "k={k} M={m} c={c}");
                }
            }
        }

        let names = [("a", "α"), ("b", "β"), ("c", "γ")];
        let leaves = names.iter().flat_map(|(x, g)| (1..=3).map(move |i| Seq::from_strs(&[x, &format!("{g}{i}")]).unwrap()));
        let tree = KMTree::from_leaves(2, 3, leaves).unwrap();
        let q: BTreeSet<Seq> = q_set(&tree, &Seq::from_strs(&["b", "β2"]).unwrap()).unwrap().into_iter().collect();
        let expected: BTreeSet<Seq> =
            [["a", "β1"], ["a", "β3"], ["c", "β1"], ["c", "β3"]].iter().map(|s| Seq::from_strs(s).unwrap()).collect();
        assert_eq!(q, expected);

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for case in 0..100 {
            let k = rng.gen_range(1..=4);
            let m = rng.gen_range(1..=12);
            let eps = [0.3, 0.5, 1.0][case % 3];
            let t = KMTree::product(k, m).unwrap();
            let total = t.leaves().len();
            let need = (eps * total as f64).ceil() as usize;
            let size = rng.gen_range(need..=total);
            let x: BTreeSet<Seq> = t.leaves().choose_multiple(&mut rng, size).cloned().collect();
            let ex = extract_subsystem(&t, &x, eps).unwrap();
            let bound = (eps * m as f64 / k as f64 - 1e-9).ceil() as usize;
            assert!(ex.m >= bound, "case {case}: m = {} below {bound}", ex.m);
            assert_eq!(ex.tree.height(), k);
            assert_eq!(ex.tree.arity(), ex.m);
            assert!(ex.tree.leaves().iter().all(|l| x.contains(l)));
            KMTree::from_leaves(k, ex.m, ex.tree.leaves().iter().cloned()).unwrap();
        }
        "Q sizes for M, k <= 4; ternary example; 100 extractions".to_string()
    });
}

/// Which leaves play `a` and `{b, c}` for a triple of a binary fortress.
fn axiom_roles(f: &Fortress, h: &ReducedHypergraph, idx: [usize; 3]) -> (Seq, BTreeSet<Seq>) {
    let leaf = |i: usize| f.tree().leaves().iter().find(|l| h.position(f.index_of(l).unwrap()) == Some(i)).unwrap().clone();
    let ls = idx.map(leaf);
    let (b, c) = [(0, 1), (0, 2), (1, 2)].into_iter().max_by_key(|&(x, y)| ls[x].wedge(&ls[y]).len()).unwrap();
    let a = 3 - b - c;
    (ls[a].clone(), BTreeSet::from([ls[b].clone(), ls[c].clone()]))
}

#[test]
fn criterion_08_fortress_equivalence() {
    criterion(8, "fortress equivalence", || {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (mut pass, mut mutations) = (0, 0);
        for case in 0..60 {
            let r = 2 + case % 2;
            let t = 1usize << r;
            let (h, c) = if case < 50 {
                // random instance, with a random assignment on a random index set
                let n = t + rng.gen_range(0..=2);
                let h = random_reduced(n, 2, rng.gen_range(0.7..1.0), &mut rng);
                let mut idx: Vec<usize> = (0..n).collect();
                idx.shuffle(&mut rng);
                let mut j = idx[..t].to_vec();
                j.sort_unstable();
                let v = k_subsets(t, 2).iter().map(|p| ((j[p[0]], j[p[1]]), rng.gen_range(0..h.class_size(j[p[0]], j[p[1]])))).collect();
                (h, ReducedClique { indices: j, vertices: v })
            } else {
                // planted clique on 0..t inside sparse noise
                let mut h = random_reduced(t + 1, 2, 0.2, &mut rng);
                let v: BTreeMap<(usize, usize), usize> =
                    k_subsets(t, 2).iter().map(|p| ((p[0], p[1]), rng.gen_range(0..h.class_size(p[0], p[1])))).collect();
                for s in k_subsets(t, 3) {
                    let (a, b, c) = (s[0], s[1], s[2]);
                    h.insert_edge(a, b, c, v[&(a, b)], v[&(a, c)], v[&(b, c)]).unwrap();
                }
                (h, ReducedClique { indices: (0..t).collect(), vertices: v })
            };
            let is_clique = is_reduced_clique(&h, &c);
            if !is_clique {
                assert!(case < 50, "planted case {case} is not a clique");
                assert!(clique_to_fortress(&h, &c).is_err());
                // the fortress with the same data must fail verification
                let tree = KMTree::product(r, 2).unwrap();
                let index = tree.leaves().iter().zip(&c.indices).map(|(l, &i)| (l.clone(), h.indices()[i].clone())).collect();
                let mut f = Fortress::new(tree, index).unwrap();
                for (a, b, d) in f.domain() {
                    let (x, y) = (h.position(f.index_of(&a).unwrap()).unwrap(), h.position(f.index_of(&b).unwrap()).unwrap());
                    f.set(&a, &b, &d, c.vertex(x, y).unwrap()).unwrap();
                }
                assert!(!verify_fortress(&h, &f).unwrap().is_empty(), "case {case}");
                assert_eq!(fortress_to_clique(&h, &f).unwrap(), c);
                continue;
            }
            pass += 1;
            let f = clique_to_fortress(&h, &c).unwrap();
            assert!(verify_fortress(&h, &f).unwrap().is_empty(), "case {case}");
            assert_eq!(fortress_to_clique(&h, &f).unwrap(), c, "case {case}");
            assert_eq!(Fortress::parse(&f.to_text()).unwrap(), f);

            let s = k_subsets(t, 3);
            let pick = s.choose(&mut rng).unwrap();
            let [x, y, z] = [c.indices[pick[0]], c.indices[pick[1]], c.indices[pick[2]]];
            let mut hm = h.clone();
            assert!(hm.remove_edge(x, y, z, c.vertex(x, y).unwrap(), c.vertex(x, z).unwrap(), c.vertex(y, z).unwrap()).unwrap());
            let bad = verify_fortress(&hm, &f).unwrap();
            assert_eq!(bad.len(), 1, "case {case}: {bad:?}");
            let (a, bc) = axiom_roles(&f, &h, [x, y, z]);
            assert_eq!(bad[0].a, a);
            assert_eq!(BTreeSet::from([bad[0].b.clone(), bad[0].c.clone()]), bc);
            assert!(!is_reduced_clique(&hm, &fortress_to_clique(&hm, &f).unwrap()));
            mutations += 1;
        }
        assert!(pass >= 10, "only {pass} clique instances");
        format!("{pass} verified fortresses, {mutations} mutations named")
    });
}

#[test]
fn criterion_09_base_statistics() {
    criterion(9, "base-case statistics", || {
        let draws = 400u64;
        let mut freqs = Vec::new();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for instance in 0..3 {
            // X_0 = {0, 1}, |P^{01}| = 4; each y in X_1 is joined to two vertices of P^{01}
            let ys = [1usize, 3, 5][instance];
            let n = 2 + ys;
            let labels = (0..n).map(Label::from).collect();
            let mut h = ReducedHypergraph::new(labels, |i, j| if i.min(j) == 0 && i.max(j) == 1 { 4 } else { 2 }).unwrap();
            let mut good = Vec::new();
            for y in 2..n {
                let mut v: Vec<usize> = (0..4).collect();
                v.shuffle(&mut rng);
                for &p in &v[..2] {
                    h.insert_edge(0, 1, y, p, 0, 0).unwrap();
                }
                good.push(v[..2].to_vec());
            }
            let set: Vec<usize> = (2..n).collect();
            let part = BasePart { set: set.clone(), selection: Selection::constant(vec![0, 1], set, 0).unwrap() };
            let mut hits = 0u64;
            for seed in 0..draws {
                let out = sample_base_selection(&h, &[0, 1], std::slice::from_ref(&part), &0.5, seed, 1).unwrap();
                if let Some(sel) = out.selection {
                    hits += 1;
                    let v = sel.vertices[&(0, 1)];
                    let members: Vec<usize> = (2..n).filter(|&y| good[y - 2].contains(&v)).collect();
                    assert_eq!(sel.ys[0], members);
                }
            }
            let freq = hits as f64 / draws as f64;
            let sigma = (0.25 * 0.75 / draws as f64).sqrt();
            assert!(freq >= 0.25 - 3.0 * sigma, "instance {instance}: frequency {freq}");
            freqs.push(format!("{freq:.3}"));
        }
        format!("frequencies {} against 1/4 - 3 sigma", freqs.join(" "))
    });
}

#[test]
fn criterion_10_constants() {
    criterion(10, "constants recursion", || {
        let lim = ConstantLimits::default();
        for m in 2..=6u64 {
            for (num, den) in [(1, 2), (1, 3), (3, 4)] {
                let eps = Rational::new(num, den);
                let t = compute_constants(2, &eps, 1, m, lim).unwrap();
                let c = t.constants().unwrap();
                assert_eq!(c.big_m, BigUint::from(m));
                assert_eq!(c.eta_exponent, BigUint::from(m * (m - 1) / 2));
                let expected = (m * (m - 1) / 2) as f64 * (num as f64 / den as f64 / 2.0).log2();
                assert!((c.log2_eta - expected).abs() <= 1e-12 * expected.abs());
            }
        }
        // by hand: M_2 = 2, M_1 = 2 + 2*4 = 10, M_0 = 10 + 10*4^45, eta_0 = 4^{-4 M_0^2}
        let t = compute_constants(2, &Rational::new(1, 2), 2, 2, lim).unwrap();
        let m0 = BigUint::from(10u32) + BigUint::from(10u32) * (BigUint::from(1u32) << 90u32);
        assert_eq!(t.m_seq, vec![Some(m0.clone()), Some(BigUint::from(10u32)), Some(BigUint::from(2u32))]);
        let e0 = BigUint::from(4u32) * &m0 * &m0;
        assert_eq!(t.eta_seq, vec![Some(e0.clone()), Some(&e0 + 45u32), Some(&e0 + 46u32)]);
        assert_eq!(t.constants().unwrap().big_m, m0);

        let mut tables = 0;
        for (r, k, m) in [(2, 2, 2), (3, 2, 2), (3, 3, 2), (3, 2, 3), (4, 2, 4)] {
            for eps in [Rational::new(1, 2), Rational::new(1, 4), Rational::new(9, 10)] {
                let t = compute_constants(r, &eps, k, m, lim).unwrap();
                for w in t.m_seq.windows(2) {
                    if let [Some(a), Some(b)] = w {
                        assert!(a > b);
                    }
                }
                for w in t.eta_seq.windows(2) {
                    if let [Some(a), Some(b)] = w {
                        assert!(a <= b);
                    }
                }
                tables += 1;
            }
        }
        format!("M_0 = {m0}; {tables} tables monotone")
    });
}

#[test]
fn criterion_11_fortress_builder() {
    criterion(11, "fortress builder", || {
        let tree = KMTree::product(2, 4).unwrap();
        let leaf_index: BTreeMap<Seq, usize> = tree.leaves().iter().cloned().zip(0..).collect();
        let h = ReducedHypergraph::complete(16, 3).unwrap();
        let params = BuildParams::new(2, 2, 2, 0.5, 0);
        let BuildOutcome::Built(b) = build_fortress(&h, &tree, &leaf_index, &[], &params).unwrap() else {
            panic!("complete instance failed on the first seed")
        };
        assert!(b.system.is_subsystem_of(&tree));
        assert!(verify_fortress(&h, &b.fortress).unwrap().is_empty());
        let c = fortress_to_clique(&h, &b.fortress).unwrap();
        assert_eq!(c.indices.len(), 4);
        assert!(is_reduced_clique(&h, &c));

        // no constituent edge through P^{0,4}: leaves 0.0 and 1.0 can never share a fortress
        let mut dead = h.clone();
        for k in (1..16).filter(|&k| k != 4) {
            for (p, q, s) in (0..27).map(|x| (x % 3, x / 3 % 3, x / 9)) {
                dead.remove_edge(0, 4, k, p, q, s).unwrap();
            }
        }
        let BuildOutcome::Failed(f) = build_fortress(&dead, &tree, &leaf_index, &[], &params).unwrap() else {
            panic!("mutated instance built")
        };
        assert_eq!(f.stage, Stage::Part3Admissibility, "{f}");
        assert!(f.detail.contains("with 4"), "{f}");
        format!("clique {:?}; mutation fails at {}", c.indices, f.stage)
    });
}

#[test]
fn criterion_12_triangle_counts() {
    criterion(12, "triangle-count sanity", || {
        let mut counts = Vec::new();
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut g = Graph::empty(300);
            let parts = [0..100, 100..200, 200..300];
            for (a, b) in [(0, 1), (0, 2), (1, 2)] {
                for u in parts[a].clone() {
                    for v in parts[b].clone() {
                        if rng.gen_bool(0.5) {
                            g.add_edge(u, v).unwrap();
                        }
                    }
                }
            }
            let sets = parts.map(|p| VertexSet::from_vertices(300, p).unwrap());
            let n = count_triangles_tripartite(&g, &sets[0], &sets[1], &sets[2]).unwrap();
            assert!((n as f64 - 125_000.0).abs() <= 50_000.0, "seed {seed}: {n}");
            counts.push(n.to_string());
        }
        format!("counts {}", counts.join(" "))
    });
}
