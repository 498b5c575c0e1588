use boxlab::construct::{audit_density, build_hypergraph, colour_class_pairs, random_colouring, AuditSpec};
use boxlab::hypercore::{count_ev, count_vvv, find_clique, Hypergraph3, PairSet, VertexSet};
use boxlab::palette::{all_patterns, standard_palette, Colour, Palette, Pattern};
use boxlab::Ratio;
use rand::seq::IteratorRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Codegree density by direct count over ordered colour pairs.
fn codegree_oracle(p: &Palette) -> Ratio {
    let l = p.colour_count() as Colour;
    let mut best = u64::MAX;
    for c in 1..=l {
        for c2 in 1..=l {
            let n = (1..=l).filter(|&c3| p.contains(&Pattern::new(c, c2, c3))).count() as u64;
            best = best.min(n);
        }
    }
    Ratio::new(best, l as u64)
}

#[test]
fn nonmono_densities_up_to_eight() {
    for l in 2..=8u64 {
        let p = standard_palette(&format!("nonmono({l})")).unwrap();
        assert_eq!(p.min_codegree(), Ratio::new(l - 1, l));
        assert_eq!(codegree_oracle(&p), p.min_codegree());
    }
}

#[test]
fn codegree_is_monotone_and_matches_the_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..40 {
        let l = rng.gen_range(1..=5);
        let all: Vec<Pattern> = all_patterns(l).collect();
        let mut p = Palette::empty(l).unwrap();
        let mut last = p.min_codegree();
        for pat in all.iter().copied().choose_multiple(&mut rng, all.len()) {
            p.insert(pat).unwrap();
            let d = p.min_codegree();
            assert!(d >= last);
            assert_eq!(d, codegree_oracle(&p));
            last = d;
        }
        assert_eq!(last, Ratio::new(1, 1));
    }
}

#[test]
fn patterns_are_order_insensitive() {
    for (a, b, c) in [(3, 1, 2), (2, 2, 1), (1, 3, 3)] {
        let p = Pattern::new(a, b, c);
        let [x, y, z] = p.colours();
        assert_eq!(Pattern::new(x, y, z), p);
        assert_eq!(Pattern::new(c, a, b), p);
        assert!(x <= y && y <= z);
    }
}

#[test]
fn class_sizes_are_binomial() {
    let n = 1000;
    let phi = random_colouring(n, 3, 4).unwrap();
    let pairs = (n * (n - 1) / 2) as f64;
    let sigma = (pairs / 3.0 * (2.0 / 3.0)).sqrt();
    for (c, &size) in phi.class_sizes().iter().enumerate() {
        assert!((size as f64 - pairs / 3.0).abs() <= 3.0 * sigma, "colour {} has {size} pairs", c + 1);
    }
    let n = 300;
    let phi = random_colouring(n, 3, 5).unwrap();
    let ordered = (n * (n - 1)) as f64;
    let sigma = 2.0 * (ordered / 2.0 / 3.0 * (2.0 / 3.0)).sqrt();
    for c in 1..=3 {
        let len = colour_class_pairs(&phi, c).unwrap().len() as f64;
        assert!((len - ordered / 3.0).abs() <= 3.0 * sigma);
    }
}

#[test]
fn hypergraph_matches_triple_loop() {
    let n = 30;
    for (seed, name) in [(1, "cyclic3"), (2, "exactly_two_of_three"), (3, "nonmono(3)")] {
        let pal = standard_palette(name).unwrap();
        let phi = random_colouring(n, 3, seed).unwrap();
        let h = build_hypergraph(&phi, &pal).unwrap();
        let mut edges = Vec::new();
        for x in 0..n {
            for y in x + 1..n {
                for z in y + 1..n {
                    if pal.contains(&Pattern::new(phi.colour(x, y), phi.colour(x, z), phi.colour(y, z))) {
                        edges.push([x, y, z]);
                    }
                }
            }
        }
        assert_eq!(h.edges().collect::<Vec<_>>(), edges);
    }
}

#[test]
fn palette_union_is_edge_union() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let all: Vec<Pattern> = all_patterns(3).collect();
    for seed in 0..5 {
        let phi = random_colouring(25, 3, seed).unwrap();
        let p1 = Palette::new(3, all.iter().copied().filter(|_| rng.gen_bool(0.4))).unwrap();
        let p2 = Palette::new(3, all.iter().copied().filter(|_| rng.gen_bool(0.4))).unwrap();
        let both = Palette::new(3, p1.patterns().chain(p2.patterns()).copied()).unwrap();
        let lhs = build_hypergraph(&phi, &both).unwrap();
        let rhs = build_hypergraph(&phi, &p1).unwrap().union(&build_hypergraph(&phi, &p2).unwrap()).unwrap();
        assert_eq!(lhs.edges().collect::<Vec<_>>(), rhs.edges().collect::<Vec<_>>());
    }
}

#[test]
fn colour_class_ratios_follow_compatible_colours() {
    let n = 300;
    let pal = standard_palette("cyclic3").unwrap();
    let phi = random_colouring(n, 3, 11).unwrap();
    let h = build_hypergraph(&phi, &pal).unwrap();
    let rep = audit_density(&h, &phi, &pal, &AuditSpec::colour_classes_only(0.02)).unwrap();
    assert_eq!(rep.families.len(), 9);
    for f in &rep.families {
        let (c, c2) = f.label.trim_start_matches("colour(").trim_end_matches(')').split_once(',').unwrap();
        let (c, c2): (Colour, Colour) = (c.parse().unwrap(), c2.parse().unwrap());
        let expected = (1..=3).filter(|&c3| pal.contains(&Pattern::new(c, c2, c3))).count() as f64 / 3.0;
        let r = f.report.ratio().unwrap();
        let got = *r.numer() as f64 / *r.denom() as f64;
        assert!((got - expected).abs() <= 0.03, "{}: {got} vs {expected}", f.label);
    }
    assert!(rep.all_hold());
}

#[test]
fn cyclic_hypergraphs_have_no_k5() {
    let pal = standard_palette("cyclic3").unwrap();
    for seed in 0..3 {
        let h = build_hypergraph(&random_colouring(40, 3, seed).unwrap(), &pal).unwrap();
        assert!(find_clique(&h, 5, None).unwrap().verdict.is_absent());
    }
}

fn random_hypergraph(n: usize, p: f64, rng: &mut ChaCha8Rng) -> Hypergraph3 {
    let mut edges = Vec::new();
    for x in 0..n {
        for y in x + 1..n {
            for z in y + 1..n {
                if rng.gen_bool(p) {
                    edges.push([x, y, z]);
                }
            }
        }
    }
    Hypergraph3::from_edges(n, edges).unwrap()
}

fn as_f64(r: Ratio) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[test]
fn random_densities_concentrate() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let n = 100;
    let h = random_hypergraph(n, 0.5, &mut rng);
    let x = VertexSet::from_vertices(n, (0..n).filter(|_| rng.gen_bool(0.5))).unwrap();
    let mut p = PairSet::empty(n);
    for a in 0..n {
        for b in 0..n {
            if a != b && rng.gen_bool(0.25) {
                p.insert(a, b).unwrap();
            }
        }
    }
    let ev = count_ev(&h, &x, &p).unwrap();
    assert!((as_f64(ev.ratio().unwrap()) - 0.5).abs() <= 0.05);

    let n = 120;
    let h = random_hypergraph(n, 0.3, &mut rng);
    let thirds: Vec<VertexSet> = (0..3)
        .map(|_| VertexSet::from_vertices(n, (0..n).filter(|_| rng.gen_bool(1.0 / 3.0))).unwrap())
        .collect();
    let vvv = count_vvv(&h, &thirds[0], &thirds[1], &thirds[2]).unwrap();
    assert!((as_f64(vvv.ratio().unwrap()) - 0.3).abs() <= 0.05);
}
