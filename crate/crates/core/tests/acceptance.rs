//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use routecap::elimination::{
    bounded_candidates, build_elimination_system, check_entry_size_bound, minimal_description, DEFAULT_ENUMERATION_CAP,
};
use routecap::feasibility::{
    boundary_witness, is_feasible, lies_on_hyperplane, max_along, on_hyperplane, satisfies_boundary_conditions,
    Feasibility, FlowAssignment, RateTuple,
};
use routecap::japanese::{make_inequality, DistanceFunction};
use routecap::network::{ring_problem, triangle_problem, Network, Problem, Session, SessionPolicy};
use routecap::numerics::Rational;
use routecap::oracle::{flow_system, fm_project, region_from_network, regions_equal, DEFAULT_ROW_CAP};
use routecap::ring_lab::{
    ring_lower_bound_distance, rounding_experiment, satisfies_forced_relations, verify_ring_lower_bound, RingConfig,
    RoundingParams,
};

type Check = Result<String, String>;

fn data(name: &str) -> String {
    format!("{}/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn cli(args: &[&str]) -> Result<Vec<Value>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_routecap"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?} exited with {:?}", out.status.code()));
    }
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).map_err(|e| e.to_string()))
        .collect()
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn q(s: &str) -> Rational {
    s.parse().unwrap()
}

fn coefficient_list(rec: &Value, problem: &Problem) -> Vec<u64> {
    problem
        .sessions
        .iter()
        .map(|s| rec["coefficients"][&s.id].as_u64().unwrap_or(u64::MAX))
        .collect()
}

fn triangle_reproduction() -> Check {
    let problem = triangle_problem(Rational::one()).map_err(|e| e.to_string())?;
    let net = data("triangle.toml");
    let g = cli(&["ineq", "--network", &net, "--distance", "2,1,3"])?;
    ensure(coefficient_list(&g[0], &problem) == [2, 2, 1, 1, 3, 3, 3, 3, 3], format!("g coefficients {}", g[0]))?;
    ensure(g[0]["rhs"] == "6", format!("g rhs {}", g[0]["rhs"]))?;
    let f = cli(&["ineq", "--network", &net, "--distance", "1,0,1"])?;
    ensure(coefficient_list(&f[0], &problem) == [1, 1, 0, 0, 1, 1, 1, 1, 1], format!("f coefficients {}", f[0]))?;
    ensure(f[0]["rhs"] == "2", format!("f rhs {}", f[0]["rhs"]))?;
    let e = cli(&["eliminate", "--network", &net, "--f", "1,0,1", "--g", "2,1,3"])?;
    ensure(e[0]["eliminates"] == true, "1,0,1 does not eliminate 2,1,3")?;
    Ok("coefficients, right-hand sides and elimination verdict exact".into())
}

fn feasibility_anchors() -> Check {
    let p = triangle_problem(Rational::one()).map_err(|e| e.to_string())?;
    let one = Rational::one();
    let cycle = RateTuple::from_pairs(&p, [("1->2", one.clone()), ("2->3", one.clone()), ("3->1", one)])
        .map_err(|e| e.to_string())?;
    let verdict = is_feasible(&p, &cycle).map_err(|e| e.to_string())?;
    ensure(verdict.is_feasible(), "unicast cycle reported infeasible")?;
    for f in [[2, 1, 3], [1, 0, 1]] {
        let f = DistanceFunction::from_u64(&f);
        ensure(on_hyperplane(&p, &cycle, &f).map_err(|e| e.to_string())?, format!("(1,1,1) not on {f}"))?;
    }
    let broadcast = RateTuple::from_pairs(&p, [("1->{2,3}", Rational::from(2))]).map_err(|e| e.to_string())?;
    match is_feasible(&p, &broadcast).map_err(|e| e.to_string())? {
        Feasibility::Infeasible(cert) => ensure(cert.verify(&p, &broadcast), "certificate fails re-check")?,
        Feasibility::Feasible(_) => return Err("broadcast rate 2 reported feasible".into()),
    }
    Ok("cycle feasible on both hyperplanes; broadcast 2 infeasible with checked certificate".into())
}

fn random_direction(rng: &mut ChaCha8Rng, n: usize) -> Vec<Rational> {
    loop {
        let d: Vec<Rational> = (0..n)
            .map(|_| {
                if rng.gen_bool(0.5) {
                    Rational::zero()
                } else {
                    Rational::new(rng.gen_range(1..5i64), rng.gen_range(1..4i64)).unwrap()
                }
            })
            .collect();
        if d.iter().any(|x| !x.is_zero()) {
            return d;
        }
    }
}

fn boundary_equivalence() -> Check {
    let instances = vec![
        ("triangle", triangle_problem(Rational::one())),
        ("4-ring", ring_problem(4, SessionPolicy::UnicastBroadcast, Rational::one())),
        ("5-ring", ring_problem(5, SessionPolicy::UnicastBroadcast, Rational::one())),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut checks = 0u64;
    let mut tight = 0u64;
    for (name, p) in instances {
        let p = p.map_err(|e| e.to_string())?;
        let fs: Vec<DistanceFunction> = bounded_candidates(p.edge_count(), 2, 1 << 20)
            .map_err(|e| e.to_string())?
            .collect();
        for _ in 0..50 {
            let d = random_direction(&mut rng, p.session_count());
            let (t, w) = max_along(&p, &d).map_err(|e| e.to_string())?;
            let point = RateTuple::new(&p, d.iter().map(|x| x * &t).collect()).map_err(|e| e.to_string())?;
            // max_along validated w, so the point is feasible.
            w.check(&p, &point)?;
            for f in &fs {
                let hyper = lies_on_hyperplane(&p, &point, f).map_err(|e| e.to_string())?;
                let witness = boundary_witness(&p, &point, f).map_err(|e| e.to_string())?;
                if let Some(w) = &witness {
                    ensure(w.check(&p, &point).is_ok() && satisfies_boundary_conditions(&p, w, f), "bad witness")?;
                }
                ensure(hyper == witness.is_some(), format!("{name}: mismatch for {f} at direction {d:?}"))?;
                checks += 1;
                tight += hyper as u64;
            }
        }
    }
    Ok(format!("{checks} (point, f) pairs agree, {tight} on the hyperplane"))
}

/// Minimum weight of an edge set separating `s` from `t`, over all vertex cuts.
fn brute_min_cut(net: &Network, s: usize, t: usize) -> Rational {
    let n = net.vertex_count;
    let mut best: Option<Rational> = None;
    for mask in 0u32..(1 << n) {
        let side = |v: usize| mask >> (v - 1) & 1 == 1;
        if !side(s) || side(t) {
            continue;
        }
        let cut: Rational = net
            .edges
            .iter()
            .filter(|e| side(e.tail) != side(e.head))
            .map(|e| e.capacity.clone())
            .sum();
        if best.as_ref().is_none_or(|b| cut < *b) {
            best = Some(cut);
        }
    }
    best.unwrap()
}

fn min_cut_property() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut done = 0;
    while done < 100 {
        let n = rng.gen_range(2..=6);
        let mut edges = Vec::new();
        for a in 1..=n {
            for b in a + 1..=n {
                if rng.gen_bool(0.5) {
                    edges.push((a, b, Rational::new(rng.gen_range(1..7i64), rng.gen_range(1..4i64)).unwrap()));
                }
            }
        }
        let net = Network::new(false, n, edges).map_err(|e| e.to_string())?;
        let (s, t) = (1, rng.gen_range(2..=n));
        if !net.reachable_from(s).contains(&t) {
            continue;
        }
        let want = brute_min_cut(&net, s, t);
        let p = Problem::new(net, vec![Session::new(s, [t])]).map_err(|e| e.to_string())?;
        let (got, _) = max_along(&p, &[Rational::one()]).map_err(|e| e.to_string())?;
        ensure(got == want, format!("graph {done}: max rate {got} vs min cut {want}"))?;
        done += 1;
    }
    Ok("100 random graphs: max rate equals brute-force min cut".into())
}

fn oracle_equivalence() -> Check {
    let instances = vec![
        ("triangle", triangle_problem(Rational::one())),
        ("4-ring", ring_problem(4, SessionPolicy::UnicastBroadcast, Rational::one())),
        ("5-ring", ring_problem(5, SessionPolicy::UnicastBroadcast, Rational::one())),
    ];
    let mut notes = Vec::new();
    for (name, p) in instances {
        let p = p.map_err(|e| e.to_string())?;
        let region = region_from_network(&p, DEFAULT_ROW_CAP).map_err(|e| e.to_string())?;
        let desc = minimal_description(&p, 1, DEFAULT_ENUMERATION_CAP).map_err(|e| e.to_string())?;
        let ineqs: Vec<_> = desc.inequalities().collect();
        ensure(regions_equal(&region, &ineqs).map_err(|e| e.to_string())?, format!("{name}: regions differ"))?;
        notes.push(format!("{name} {}/{}", region.rows.len(), desc.len()));
    }
    Ok(format!("regions equal (oracle rows/survivors: {})", notes.join(", ")))
}

fn ring_lower_bound() -> Check {
    for (n, cap) in [(5, 1), (8, 3)] {
        let r = verify_ring_lower_bound(n, cap, SessionPolicy::AllMulticast, DEFAULT_ENUMERATION_CAP)
            .map_err(|e| e.to_string())?;
        ensure(r.holds(), format!("|E|={n}: eliminators {:?}", r.eliminators))?;
    }
    for n in 5..=32 {
        let g = ring_lower_bound_distance(n).map_err(|e| e.to_string())?;
        ensure(satisfies_forced_relations(&g, n), format!("relations fail at |E|={n}"))?;
    }
    Ok("no eliminator below beta at |E|=5 and 8; relations hold for |E|=5..32".into())
}

fn elimination_bookkeeping() -> Check {
    let p = triangle_problem(Rational::one()).map_err(|e| e.to_string())?;
    let desc = minimal_description(&p, 1, DEFAULT_ENUMERATION_CAP).map_err(|e| e.to_string())?;
    let mut worst = 0;
    for ineq in desc.inequalities() {
        let f = &ineq.distance;
        let sys = build_elimination_system(&p, f).map_err(|e| e.to_string())?;
        ensure(sys.entries_are_unit(), format!("{f}: entries outside {{0,+1,-1}}"))?;
        ensure(sys.satisfied_by(f.values()), format!("{f} does not solve its own system"))?;
        let rep = check_entry_size_bound(&p, f).map_err(|e| e.to_string())?;
        ensure(rep.solves_system && rep.within_bound, format!("{f}: {:?}", rep))?;
        worst = worst.max(rep.max_entry_size.bits);
    }
    Ok(format!("{} survivors, largest solution entry {worst} bits of 720", desc.len()))
}

fn rounding() -> Check {
    let ring = RingConfig::new(8, SessionPolicy::AllMulticast).map_err(|e| e.to_string())?;
    let params = RoundingParams {
        m: 6,
        g_max: BigUint::from(8u32).pow(7),
        trials: 200,
        seed: 20240,
    };
    let r = rounding_experiment(&ring, &params).map_err(|e| e.to_string())?;
    ensure(r.residual_violations == 0, format!("{} residual violations", r.residual_violations))?;
    // s/200 >= 1/2 - 3 sqrt(1/800), decided exactly.
    let gap = BigRational::new(BigInt::one(), BigInt::from(2)) - BigRational::new(r.successes.into(), 200.into());
    let margin_sq = BigRational::new(9.into(), 800.into());
    ensure(gap <= BigRational::zero() || &gap * &gap <= margin_sq, format!("{} / 200 successes", r.successes))?;
    Ok(format!("{} / 200 successes (seed {}), residual bound held on {} pairs", r.successes, r.seed, r.pairs))
}

fn rational_checks(rng: &mut ChaCha8Rng) -> Result<(), String> {
    for _ in 0..2000 {
        let mut pick = || -> (Rational, BigRational) {
            let big = rng.gen_bool(0.3);
            let n: i64 = if big { rng.gen() } else { rng.gen_range(-50..50) };
            let d: i64 = if big { rng.gen_range(1..i64::MAX) } else { rng.gen_range(1..20) };
            (Rational::new(n, d).unwrap(), BigRational::new(n.into(), d.into()))
        };
        let (a, ab) = pick();
        let (b, bb) = pick();
        for (got, want) in [(&a + &b, &ab + &bb), (&a - &b, &ab - &bb), (&a * &b, &ab * &bb)] {
            ensure(got.to_big() == want, "arithmetic disagrees with reference")?;
            ensure(got.denom() > BigInt::zero(), "denominator not positive")?;
        }
        if !b.is_zero() {
            ensure((&a / &b).to_big() == &ab / &bb, "division disagrees")?;
        }
        ensure(a.to_string().parse::<Rational>().unwrap() == a, "display does not round-trip")?;
    }
    Ok(())
}

fn scaling_checks(p: &Problem) -> Result<(), String> {
    for f in bounded_candidates(p.edge_count(), 2, 1 << 20).map_err(|e| e.to_string())? {
        let base = make_inequality(p, &f).map_err(|e| e.to_string())?;
        if base.is_trivial() {
            continue;
        }
        for c in [2u32, 3, 7] {
            let scaled = make_inequality(p, &f.scaled(&BigUint::from(c))).map_err(|e| e.to_string())?;
            ensure(scaled.normal_key().map_err(|e| e.to_string())? == base.normal_key().map_err(|e| e.to_string())?, format!("normal form changes under {c} * {f}"))?;
        }
    }
    Ok(())
}

/// Independent re-check of a flow assignment.
fn revalidate(p: &Problem, w: &FlowAssignment, rates: &RateTuple) -> bool {
    for (i, flows) in w.flows.iter().enumerate() {
        if flows.iter().any(|x| x.is_negative()) || flows.iter().cloned().sum::<Rational>() != rates.rates[i] {
            return false;
        }
    }
    p.network.edges.iter().all(|e| {
        let load: Rational = (0..p.session_count())
            .flat_map(|i| (0..p.subtrees[i].len()).map(move |j| (i, j)))
            .filter(|&(i, j)| p.subtrees[i][j].contains(e.id))
            .map(|(i, j)| w.flows[i][j].clone())
            .sum();
        load <= e.capacity
    })
}

fn region_checks(p: &Problem, rng: &mut ChaCha8Rng) -> Result<(), String> {
    let (sys, keep) = flow_system(p);
    let region = fm_project(&sys, &keep, DEFAULT_ROW_CAP).map_err(|e| e.to_string())?;
    for _ in 0..200 {
        let d = random_direction(rng, p.session_count());
        let (t, _) = max_along(p, &d).map_err(|e| e.to_string())?;
        let u = Rational::new(rng.gen_range(0..=12i64), 10).unwrap();
        let point = RateTuple::new(p, d.iter().map(|x| x * &t * &u).collect()).map_err(|e| e.to_string())?;
        let verdict = is_feasible(p, &point).map_err(|e| e.to_string())?;
        ensure(region.contains(&point.rates) == verdict.is_feasible(), "projection disagrees with lift LP")?;
        if let Feasibility::Feasible(w) = &verdict {
            ensure(revalidate(p, w, &point), "witness fails independent re-check")?;
            // every componentwise smaller tuple stays feasible
            let shrink: Vec<Rational> = point
                .rates
                .iter()
                .map(|r| r * &Rational::new(rng.gen_range(0..=4i64), 4).unwrap())
                .collect();
            let smaller = RateTuple::new(p, shrink).map_err(|e| e.to_string())?;
            ensure(is_feasible(p, &smaller).map_err(|e| e.to_string())?.is_feasible(), "downward closure fails")?;
        }
    }
    ensure(!region.contains(&vec![q("-1/10"); p.session_count()]), "region admits negative rates")?;
    Ok(())
}

fn property_suites() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    rational_checks(&mut rng)?;
    let tri = triangle_problem(Rational::one()).map_err(|e| e.to_string())?;
    let ring = ring_problem(4, SessionPolicy::UnicastBroadcast, Rational::one()).map_err(|e| e.to_string())?;
    for p in [&tri, &ring] {
        scaling_checks(p)?;
        region_checks(p, &mut rng)?;
    }
    Ok("numerics, scaling invariance, projection soundness, downward closure, witnesses".into())
}

fn main() {
    let criteria: Vec<(u32, &str, Duration, fn() -> Check)> = vec![
        (1, "triangle reproduction", Duration::from_secs(1), triangle_reproduction),
        (2, "feasibility anchors", Duration::from_secs(1), feasibility_anchors),
        (3, "boundary equivalence", Duration::from_secs(300), boundary_equivalence),
        (4, "min-cut property", Duration::from_secs(120), min_cut_property),
        (5, "oracle equivalence", Duration::from_secs(600), oracle_equivalence),
        (6, "ring lower bound", Duration::from_secs(900), ring_lower_bound),
        (7, "elimination system bookkeeping", Duration::from_secs(60), elimination_bookkeeping),
        (8, "rounding experiment", Duration::from_secs(600), rounding),
        (9, "property suites", Duration::from_secs(600), property_suites),
    ];
    let mut failed = 0;
    for (id, name, limit, check) in criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let verdict = match result {
            Ok(note) if elapsed <= limit => format!("PASS {id} {name}: {note} ({elapsed:.2?})"),
            Ok(note) => format!("FAIL {id} {name}: {note}, but took {elapsed:.2?} (limit {limit:?})"),
            Err(why) => format!("FAIL {id} {name}: {why} ({elapsed:.2?})"),
        };
        failed += verdict.starts_with("FAIL") as u32;
        println!("{verdict}");
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
