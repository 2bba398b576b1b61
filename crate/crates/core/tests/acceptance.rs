//! Acceptance suite. Runs every criterion in sequence, prints one PASS/FAIL line
//! each and exits non-zero if any fails or overruns its time limit.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use frobexp::arith::{Fp, Mat, Modulus, Poly};
use frobexp::exponential::{engel_flag, tuple_to_infinitesimal, CommutingTuple};
use frobexp::morphisms::OneParamSubgroup;
use frobexp::oracle::{
    certify_surjectivity, lie_elements, random_commuting_nilpotents, random_generator_change,
    verify_bijection, verify_commutation_equivalence, verify_equivariance, EnumerationReport,
    HopfSolver, SampleSource, DEFAULT_BUDGET,
};
use frobexp::rootsys::{build_root_system, Family, ParabolicDatum};
use frobexp::unipotent::{make_group, BlockUnipotentGroup};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Option<Duration>,
    run: fn() -> Outcome,
}

fn group(blocks: &[usize], p: u64) -> Arc<BlockUnipotentGroup> {
    make_group(blocks, p).expect("valid group")
}

fn report_outcome(report: &EnumerationReport, keys: &[&str]) -> Outcome {
    let counts: Vec<String> = keys
        .iter()
        .map(|k| format!("{k}={}", report.get(k)))
        .collect();
    if report.passed() {
        Ok(format!("{} {}", report.instance, counts.join(" ")))
    } else {
        Err(format!(
            "{}: {} failures, first: {:?}",
            report.instance,
            report.failures.len(),
            report.failures[0]
        ))
    }
}

const LIFT_GROUPS: [&[usize]; 4] = [&[1, 1, 1], &[2, 1], &[1, 2, 1], &[1, 1, 1, 1]];

/// The morphisms shared by criteria 1 and 2: 32 per (blocks, p, r), 512 in all.
fn lift_samples() -> Vec<frobexp::morphisms::InfinitesimalSubgroup> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut out = Vec::new();
    for blocks in LIFT_GROUPS {
        for p in [5, 7] {
            let g = group(blocks, p);
            for r in [1, 2] {
                let solver = HopfSolver::new(&g, r).expect("solver");
                for _ in 0..32 {
                    out.push(solver.sample(&mut rng, None).expect("sample"));
                }
            }
        }
    }
    out
}

fn lift_correctness() -> Outcome {
    let samples = lift_samples();
    let mut nontrivial = 0;
    for phi in &samples {
        nontrivial += usize::from(!phi.is_trivial());
        let psi = phi.lift().map_err(|e| e.to_string())?;
        OneParamSubgroup::new(phi.group(), psi.images().to_vec())
            .map_err(|e| format!("lift invalid: {e}"))?;
        let back = psi.restrict(phi.height()).map_err(|e| e.to_string())?;
        if back != *phi {
            return Err(format!("restrict(lift) differs for {:?}", phi.to_json()));
        }
    }
    Ok(format!(
        "{} morphisms ({nontrivial} nontrivial)",
        samples.len()
    ))
}

fn degree_bound() -> Outcome {
    let samples = lift_samples();
    let mut images = 0;
    for phi in &samples {
        let g = phi.group();
        let scale = g.p().pow(phi.height() - 1) as usize;
        for (gen, img) in g.generators().iter().zip(phi.images()) {
            images += 1;
            let top = img.coeffs().iter().rposition(|&c| c != 0).unwrap_or(0);
            if top > gen.grade as usize * scale {
                return Err(format!(
                    "{} has degree {top} in {:?}",
                    gen.name(),
                    phi.to_json()
                ));
            }
        }
    }
    Ok(format!("{images} generator images"))
}

fn generator_change() -> Outcome {
    let g = group(&[1, 1, 1], 5);
    let solver = HopfSolver::new(&g, 2).expect("solver");
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for k in 0..50 {
        let change = random_generator_change(&g, &mut rng).map_err(|e| e.to_string())?;
        let phi = solver.sample(&mut rng, None).map_err(|e| e.to_string())?;
        let direct = phi.lift().map_err(|e| e.to_string())?;
        let via = change.lift(&phi).map_err(|e| e.to_string())?;
        if via != direct.images() {
            return Err(format!(
                "substitution {k}: {:?} vs {:?}",
                via,
                direct.images()
            ));
        }
    }
    Ok("50 substitutions".into())
}

fn commutation() -> Outcome {
    let g = group(&[1, 1, 1], 5);
    let report = verify_commutation_equivalence(&g, 1, SampleSource::AllTuples, DEFAULT_BUDGET)
        .map_err(|e| e.to_string())?;
    if report.get("pairs") != 125 * 125 {
        return Err(format!("expected 15625 pairs, got {}", report.get("pairs")));
    }
    report_outcome(&report, &["pairs", "commuting_pairs"])
}

fn equivariance() -> Outcome {
    let cases: [(&[usize], u64, u32, usize); 4] = [
        (&[1, 1, 1], 5, 2, 60),
        (&[2, 1], 5, 2, 40),
        (&[1, 2, 1], 5, 1, 52),
        (&[1, 1, 1, 1], 7, 1, 48),
    ];
    let mut lines = Vec::new();
    let mut total = 0;
    for (blocks, p, r, samples) in cases {
        let report =
            verify_equivariance(&group(blocks, p), r, samples, 5).map_err(|e| e.to_string())?;
        report_outcome(&report, &["samples"])?;
        total += report.get("samples");
        lines.push(format!(
            "{blocks:?}/p{p}/r{r} ({} nontrivial, {} outside P)",
            report.get("nontrivial"),
            report.get("outside_parabolic")
        ));
    }
    if total != 200 {
        return Err(format!("{total} samples"));
    }
    Ok(format!("200 samples over {}", lines.join(", ")))
}

fn bijection() -> Outcome {
    let mut parts = Vec::new();
    for (blocks, p, r, tuples) in [
        (&[1, 1, 1][..], 5, 2, 3625),
        (&[2, 1][..], 3, 3, 729),
        (&[1, 1, 1, 1][..], 5, 1, 15625),
    ] {
        let report =
            verify_bijection(&group(blocks, p), r, DEFAULT_BUDGET).map_err(|e| e.to_string())?;
        report_outcome(&report, &[])?;
        if report.get("tuples") != tuples
            || report.get("distinct_morphisms") != tuples
            || report.get("round_trips") != tuples
        {
            return Err(format!("{}: counts {:?}", report.instance, report.counts));
        }
        parts.push(format!("{blocks:?}/p{p}/r{r}: {tuples}"));
    }
    Ok(parts.join(", "))
}

fn surjectivity() -> Outcome {
    let mut parts = Vec::new();
    let cases: [(&[usize], u64, u32, u64); 6] = [
        (&[1, 1], 3, 1, 3),
        (&[1, 1], 3, 2, 9),
        (&[1, 1], 3, 3, 27),
        (&[2, 1], 3, 1, 9),
        (&[2, 1], 3, 2, 81),
        (&[1, 1, 1], 3, 2, 297),
    ];
    for (blocks, p, r, expected) in cases {
        let report = certify_surjectivity(&group(blocks, p), r, DEFAULT_BUDGET)
            .map_err(|e| e.to_string())?;
        report_outcome(&report, &[])?;
        if report.get("morphisms") != expected || report.get("tuples") != expected {
            return Err(format!("{}: counts {:?}", report.instance, report.counts));
        }
        parts.push(format!("{blocks:?}/r{r}: {expected}"));
    }
    Ok(parts.join(", "))
}

/// `exp(t x) = Σ_{k<p} t^k x^k / k!` with plain integer arithmetic mod p.
#[allow(clippy::needless_range_loop)]
fn exp_entries(x: &[u64], n: usize, p: u64) -> Vec<Vec<u64>> {
    let mul = |a: &[u64], b: &[u64]| -> Vec<u64> {
        (0..n * n)
            .map(|ij| {
                (0..n)
                    .map(|k| a[ij / n * n + k] * b[k * n + ij % n])
                    .sum::<u64>()
                    % p
            })
            .collect()
    };
    let inv = |a: u64| (1..p).find(|b| a * b % p == 1).expect("unit");
    let mut out = vec![vec![0u64; p as usize]; n * n];
    let mut power: Vec<u64> = (0..n * n).map(|ij| u64::from(ij / n == ij % n)).collect();
    let mut fact = 1;
    for k in 0..p as usize {
        if k > 0 {
            power = mul(&power, x);
            fact = fact * k as u64 % p;
        }
        let scale = inv(fact);
        for ij in 0..n * n {
            out[ij][k] = power[ij] * scale % p;
        }
    }
    out
}

fn classical_agreement() -> Outcome {
    let g = group(&[1, 1, 1], 5);
    let elements = lie_elements(&g);
    for x in &elements {
        let tuple = CommutingTuple::new(&g, vec![x.clone()]).map_err(|e| e.to_string())?;
        let psi = tuple_to_infinitesimal(&tuple, 1)
            .and_then(|phi| Ok(phi.lift()?))
            .map_err(|e| e.to_string())?;
        let expected = exp_entries(&x.to_residues(), 3, 5);
        for (gen, img) in g.generators().iter().zip(psi.images()) {
            let want = Poly::from_residues(g.modulus(), expected[gen.row * 3 + gen.col].clone());
            if *img != want {
                return Err(format!(
                    "x = {:?}, {}: {:?} vs {:?}",
                    x.to_residues(),
                    gen.name(),
                    img,
                    want
                ));
            }
        }
    }
    Ok(format!("{} elements", elements.len()))
}

fn engel() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for k in 0..200 {
        let p = if k % 2 == 0 { 5 } else { 7 };
        let n = rng.gen_range(3..=4);
        let modulus = Modulus::new(p).expect("prime");
        let xs = random_commuting_nilpotents(modulus, n, 2, &mut rng);
        let flag = engel_flag(modulus, n, &xs).map_err(|e| e.to_string())?;
        let inv = flag
            .inverse()
            .map_err(|e| format!("flag not invertible: {e}"))?;
        for x in &xs {
            let y: Mat<Fp> = flag.mul(x).mul(&inv);
            let upper = (0..n).all(|i| (0..=i).all(|j| y.get(i, j).value() == 0));
            if !upper {
                return Err(format!(
                    "pair {k}: {:?} -> {:?}",
                    x.to_residues(),
                    y.to_residues()
                ));
            }
        }
    }
    Ok("200 pairs".into())
}

fn root_systems() -> Outcome {
    let cases = [
        (Family::A, 1, 2),
        (Family::A, 2, 3),
        (Family::A, 3, 4),
        (Family::A, 4, 5),
        (Family::B, 2, 4),
        (Family::G, 2, 6),
        (Family::D, 4, 6),
    ];
    for (family, rank, h) in cases {
        let rs = build_root_system(family, rank).map_err(|e| e.to_string())?;
        let class = ParabolicDatum::new(rs, &[])
            .map_err(|e| e.to_string())?
            .nilpotence_class();
        if class != h - 1 {
            return Err(format!("{family}{rank}: class {class}, expected {}", h - 1));
        }
    }
    // p > 2 for B, C, D; p > 3 for E6, E7, F4, G2; p > 5 for E8; every p for A.
    let table: [(Family, usize, u64); 9] = [
        (Family::A, 3, 2),
        (Family::B, 3, 3),
        (Family::C, 3, 3),
        (Family::D, 4, 3),
        (Family::E, 6, 5),
        (Family::E, 7, 5),
        (Family::F, 4, 5),
        (Family::G, 2, 5),
        (Family::E, 8, 7),
    ];
    for (family, rank, smallest_good) in table {
        let rs = build_root_system(family, rank).map_err(|e| e.to_string())?;
        for p in [2, 3, 5, 7, 11, 13] {
            if rs.is_good_prime(p) != (p >= smallest_good) {
                return Err(format!("{family}{rank} at p={p}"));
            }
        }
    }
    Ok("7 classes, 9 good-prime rows".into())
}

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            id: 1,
            name: "lift correctness",
            limit: Some(Duration::from_secs(30)),
            run: lift_correctness,
        },
        Criterion {
            id: 2,
            name: "degree bound",
            limit: None,
            run: degree_bound,
        },
        Criterion {
            id: 3,
            name: "generator-change independence",
            limit: None,
            run: generator_change,
        },
        Criterion {
            id: 4,
            name: "commutation equivalence",
            limit: Some(Duration::from_secs(60)),
            run: commutation,
        },
        Criterion {
            id: 5,
            name: "equivariance",
            limit: None,
            run: equivariance,
        },
        Criterion {
            id: 6,
            name: "bijection round-trip",
            limit: Some(Duration::from_secs(120)),
            run: bijection,
        },
        Criterion {
            id: 7,
            name: "surjectivity certificates",
            limit: None,
            run: surjectivity,
        },
        Criterion {
            id: 8,
            name: "r=1 classical agreement",
            limit: None,
            run: classical_agreement,
        },
        Criterion {
            id: 9,
            name: "Engel flag",
            limit: None,
            run: engel,
        },
        Criterion {
            id: 10,
            name: "root-system regressions",
            limit: None,
            run: root_systems,
        },
    ];
    let mut failed = 0;
    for c in &criteria {
        let started = Instant::now();
        let outcome = (c.run)();
        let elapsed = started.elapsed();
        let outcome = match (outcome, c.limit) {
            (Ok(_), Some(limit)) if elapsed > limit => {
                Err(format!("took {elapsed:.2?}, limit {limit:?}"))
            }
            (o, _) => o,
        };
        match outcome {
            Ok(detail) => println!("PASS {:>2} {} ({elapsed:.2?}): {detail}", c.id, c.name),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {} ({elapsed:.2?}): {detail}", c.id, c.name);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
