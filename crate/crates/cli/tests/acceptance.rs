//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;

use localwave::bridge::{self, SymbolFunction};
use localwave::cascade::{self, CascadeMode};
use localwave::field::FieldElement;
use localwave::first_stage::{self, designs, FilterBank, ShiftSystem};
use localwave::gf::{FieldParams, GaloisField, GfElement};
use localwave::lambda::{LambdaIndex, NuPolicy, Numra, NumraParams};
use localwave::transform::{chi, coset_character_sum, fourier_sequence, parseval_pair, OmegaDomain, Region, Sequence};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn numra(p: u32, c: u32, n: u64, r: u64, nu: Option<NuPolicy>) -> Numra {
    Numra::new(NumraParams::simple(p, c, n, r, nu).unwrap()).unwrap()
}

const FIELDS: [(u32, u32); 6] = [(2, 1), (3, 1), (2, 2), (5, 1), (2, 3), (3, 2)];

fn field_axioms(gf: &GaloisField) -> Result<(), String> {
    let all: Vec<GfElement> = gf.all().collect();
    let zero = gf.from_int(0);
    let one = gf.from_int(1);
    for &a in &all {
        ensure(gf.add(a, zero) == a && gf.mul(a, one) == a, || format!("identity fails at {a:?}"))?;
        ensure(gf.add(a, gf.neg(a)) == zero, || format!("additive inverse fails at {a:?}"))?;
        if a != zero {
            let inv = gf.inv(a).map_err(|e| e.to_string())?;
            ensure(gf.mul(a, inv) == one, || format!("multiplicative inverse fails at {a:?}"))?;
        }
        for &b in &all {
            ensure(gf.add(a, b) == gf.add(b, a) && gf.mul(a, b) == gf.mul(b, a), || format!("commutativity fails at {a:?},{b:?}"))?;
            for &c in &all {
                ensure(gf.add(gf.add(a, b), c) == gf.add(a, gf.add(b, c)), || "additive associativity".into())?;
                ensure(gf.mul(gf.mul(a, b), c) == gf.mul(a, gf.mul(b, c)), || "multiplicative associativity".into())?;
                ensure(gf.mul(a, gf.add(b, c)) == gf.add(gf.mul(a, b), gf.mul(a, c)), || "distributivity".into())?;
            }
        }
    }
    ensure(gf.inv(zero).is_err(), || "0 has an inverse".into())
}

fn ac1() -> Outcome {
    let mut triples = 0u64;
    for (p, c) in FIELDS {
        let gf = GaloisField::new(FieldParams::new(p, c, None).map_err(|e| e.to_string())?);
        field_axioms(&gf).map_err(|e| format!("GF({p}^{c}): {e}"))?;
        let a = numra(p, c, 1, 1, None);
        let lf = a.field();
        let q = a.q();
        for k in 0..=3u32 {
            let shift = lf.prime_pow(-(k as i32)).unwrap();
            for r in 0..q.pow(3) {
                let ur = lf.mul(&a.u_of(r).unwrap(), &shift).unwrap();
                for s in 0..q.pow(k) {
                    let lhs = a.u_of(r * q.pow(k) + s).unwrap();
                    let rhs = lf.add(&ur, &a.u_of(s).unwrap());
                    ensure(lhs == rhs, || format!("radix identity fails for q={q} r={r} k={k} s={s}"))?;
                    triples += 1;
                }
            }
        }
    }
    Ok(format!("field axioms exhaustive on q in {{2,3,4,5,8,9}}; radix identity exact on {triples} (r,k,s)"))
}

fn random_element(a: &Numra, g: &mut rand_chacha::ChaCha8Rng, lo: i32, hi: i32) -> FieldElement {
    let q = a.q() as u32;
    let terms: Vec<(i32, GfElement)> = (lo..=hi).map(|e| (e, GfElement::from_index(g.random_range(0..q)))).collect();
    a.field().from_terms(&terms).unwrap()
}

fn ac2() -> Outcome {
    let mut g = designs::rng(2);
    let mut pairs = 0;
    let mut sums = 0;
    for (p, c) in FIELDS {
        let a = numra(p, c, 1, 1, None);
        let lf = a.field();
        for _ in 0..10_000 / FIELDS.len() + 1 {
            let x = random_element(&a, &mut g, -6, 6);
            let y = random_element(&a, &mut g, -6, 6);
            let lhs = chi(lf, &lf.add(&x, &y)).unwrap();
            let rhs = chi(lf, &x).unwrap().combine(chi(lf, &y).unwrap()).unwrap();
            ensure(lhs == rhs, || format!("additivity fails on GF({p}^{c})"))?;
            let d = random_element(&a, &mut g, 0, 6);
            ensure(chi(lf, &d).unwrap().is_one(), || format!("chi nontrivial on the integers of GF({p}^{c})"))?;
            pairs += 1;
        }
        let nontrivial = lf.gf().all().any(|z| !chi(lf, &lf.monomial(z, -1).unwrap()).unwrap().is_one());
        ensure(nontrivial, || format!("chi trivial on B^-1 for GF({p}^{c})"))?;
        // 𝔇/𝔅^m has q^m cells; m = 4 for q ≤ 5 and m = 3 beyond keeps the sweep at desk scale.
        let mmax = if a.q() <= 5 { 4 } else { 3 };
        for m in 1..=mmax {
            for n in 1..a.q().pow(m as u32) {
                let s = coset_character_sum(&a, &a.u_of(n).unwrap(), m).unwrap();
                ensure(s.is_zero(), || format!("coset sum nonzero for q={} m={m} n={n}", a.q()))?;
                sums += 1;
            }
        }
    }
    Ok(format!("additivity on {pairs} pairs; {sums} coset sums vanish exactly"))
}

fn random_sequence(a: &Numra, digits: u32, seed: u64) -> Sequence {
    let mut g = designs::rng(seed);
    Sequence::from_pairs(a.index_set(digits).into_iter().map(|l| (l, designs::gaussian(&mut g))))
}

fn ac3() -> Outcome {
    let mut worst = 0.0f64;
    for p in [2u32, 3] {
        let a = numra(p, 1, 1, 1, None);
        let omega = OmegaDomain::working(&a);
        let constant = omega.measure(a.q() as u32);
        for k in 0..100u64 {
            let z = random_sequence(&a, 1 + (k % 3) as u32, 1000 * p as u64 + k);
            let (norm, integral) = parseval_pair(&a, &z, &omega.region).unwrap();
            worst = worst.max((integral - constant * norm).abs() / norm.max(1.0));
        }
    }
    ensure(worst < 1e-10, || format!("Parseval residual {worst:.3e}"))?;
    Ok(format!("max relative residual {worst:.3e} over 200 sequences"))
}

fn ac4() -> Outcome {
    let a = numra(2, 1, 1, 1, None);
    let bank = designs::haar(&a).unwrap();
    let gram = first_stage::gram_oracle(&a, &bank, 4, 1e-12).unwrap();
    ensure(gram.residual < 1e-12, || format!("gram residual {:.3e}", gram.residual))?;
    let uni = first_stage::unitarity_check(&a, &bank, 3, 1e-12).unwrap();
    ensure(uni.residual < 1e-12, || format!("unitarity residual {:.3e}", uni.residual))?;
    let stages = cascade::build_stages(&a, &[bank], 3, CascadeMode::FatherChain, true).unwrap();
    let (mut rec, mut energy) = (0.0f64, 0.0f64);
    for k in 0..50 {
        let z = random_sequence(&a, 6, 400 + k);
        let dec = cascade::dwt(&a, &z, &stages, 6).unwrap();
        let back = cascade::idwt(&a, &dec, &stages).unwrap();
        rec = rec.max(back.sub(&z).max_abs());
        energy = energy.max((dec.energy() - z.norm_sq()).abs());
    }
    ensure(rec < 1e-10, || format!("reconstruction error {rec:.3e}"))?;
    ensure(energy < 1e-10, || format!("energy gap {energy:.3e}"))?;
    Ok(format!("gram {:.1e}, unitarity {:.1e}, reconstruction {rec:.1e}, energy {energy:.1e}", gram.residual, uni.residual))
}

fn equivalence(a: &Numra, bank: &FilterBank) -> (bool, bool) {
    let window = bank.max_digits(a).max(a.delta_degree() as u32).max(2);
    let res = ShiftSystem::new(a, &bank.filters, 1).unwrap().required_resolution().max(1);
    let r = first_stage::oracle_equivalence(a, bank, window, res, 1e-10).unwrap();
    (r.gram.pass, r.unitarity.pass)
}

fn ac5() -> Outcome {
    let a = numra(2, 1, 1, 1, None);
    let b = numra(3, 1, 1, 1, None);
    let haar = designs::haar(&a).unwrap();
    let mut random: Vec<(&Numra, FilterBank)> = Vec::new();
    for s in 0..40u64 {
        random.push((&a, designs::random_paraunitary(&a, 1 + (s % 3) as usize, s).unwrap()));
        random.push((&a, designs::random_gaussian(&a, 1 + (s % 2) as u32, s).unwrap()));
    }
    for s in 0..15u64 {
        random.push((&b, designs::random_paraunitary(&b, 1 + (s % 2) as usize, 100 + s).unwrap()));
        random.push((&b, designs::random_gaussian(&b, 1, 100 + s).unwrap()));
    }
    let positives: Vec<(&Numra, FilterBank)> = vec![
        (&a, haar.clone()),
        (&a, designs::lazy(&a).unwrap()),
        (&a, designs::phase_rotate(&haar, &[0.3, -1.1])),
        (&a, designs::phase_rotate(&haar, &[2.0, 0.0])),
        (&a, designs::phase_rotate(&haar, &[0.0, 3.0])),
        (&a, designs::unitary_mix(&haar, &designs::random_unitary(2, &mut designs::rng(7))).unwrap()),
        (&a, designs::coset_shift(&a, &haar, 0, 1, LambdaIndex::z(1)).unwrap()),
        (&b, designs::vilenkin(&b).unwrap()),
        (&b, designs::lazy(&b).unwrap()),
        (&b, designs::phase_rotate(&designs::vilenkin(&b).unwrap(), &[0.5, 1.5, -0.5])),
    ];
    let eps = Complex64::new(0.05, 0.0);
    let negatives: Vec<(&Numra, FilterBank)> = vec![
        (&a, designs::perturb(&haar, 0, LambdaIndex::z(0), eps)),
        (&a, designs::perturb(&haar, 1, LambdaIndex::z(1), eps)),
        (&a, designs::perturb(&haar, 0, LambdaIndex::z(2), eps)),
        (&a, designs::perturb(&haar, 1, LambdaIndex::z(3), Complex64::new(0.0, 0.1))),
        (&a, haar.scaled(1.1)),
        (&a, haar.scaled(0.9)),
        (&a, haar.scaled(2f64.sqrt())),
        (&b, designs::vilenkin(&b).unwrap().scaled(0.5)),
        (&b, designs::perturb(&designs::vilenkin(&b).unwrap(), 2, LambdaIndex::z(1), eps)),
        (&b, designs::perturb(&designs::lazy(&b).unwrap(), 0, LambdaIndex::z(4), eps)),
    ];
    let mut disagree = 0;
    let mut random_pass = 0;
    for (n, bank) in &random {
        let (g, u) = equivalence(n, bank);
        disagree += usize::from(g != u);
        random_pass += usize::from(g && u);
    }
    for (n, bank) in &positives {
        let (g, u) = equivalence(n, bank);
        ensure(g && u, || format!("curated positive failed (gram {g}, unitarity {u})"))?;
    }
    for (n, bank) in &negatives {
        let (g, u) = equivalence(n, bank);
        ensure(!g && !u, || format!("curated negative passed (gram {g}, unitarity {u})"))?;
    }
    ensure(disagree == 0, || format!("{disagree} random banks where the oracles disagree"))?;
    Ok(format!(
        "{} random banks ({random_pass} orthonormal), 10 positives, 10 negatives: 100% agreement",
        random.len()
    ))
}

fn ac6() -> Outcome {
    let a = numra(2, 1, 1, 1, None);
    let stages = cascade::build_stages(&a, &[designs::haar(&a).unwrap()], 3, CascadeMode::FatherChain, true).unwrap();
    let mut worst = (0.0f64, 0.0f64);
    for level in 1..=3 {
        let r = cascade::splitting_check(&a, &stages, level, 3, 50, 600 + level as u64, 1e-10).unwrap();
        ensure(r.energy_residual < 1e-10, || format!("level {level} energy residual {:.3e}", r.energy_residual))?;
        ensure(r.cross_gram < 1e-12, || format!("level {level} cross Gram {:.3e}", r.cross_gram))?;
        worst = (worst.0.max(r.energy_residual), worst.1.max(r.cross_gram));
    }
    Ok(format!("levels 1..3, 50 signals each: energy {:.1e}, cross Gram {:.1e}", worst.0, worst.1))
}

fn ac7() -> Outcome {
    let mut worst = 0.0f64;
    for p in [2u32, 3] {
        let a = numra(p, 1, 1, 1, None);
        let banks = [designs::vilenkin(&a).unwrap(), designs::random_paraunitary(&a, 2, 70 + p as u64).unwrap()];
        for bank in banks {
            for depth in 1..=3 {
                let stages = cascade::build_stages(&a, std::slice::from_ref(&bank), depth, CascadeMode::FatherChain, true).unwrap();
                for k in 0..3 {
                    let z = random_sequence(&a, 3, 700 + 10 * depth as u64 + k);
                    let fast = cascade::dwt(&a, &z, &stages, 3).unwrap();
                    let slow = cascade::dwt_slow(&a, &z, &stages, 3).unwrap();
                    worst = worst.max(fast.max_diff(&slow));
                }
            }
        }
    }
    ensure(worst < 1e-10, || format!("fast/slow gap {worst:.3e}"))?;
    Ok(format!("q in {{2,3}}, J <= 3: max gap {worst:.3e}"))
}

/// F_{k+1}(ξ) = m₀(δ⁻¹ξ)F_k(δ⁻¹ξ) from F₀ ≡ 1, iterated to a fixed point with
/// m₀ taken straight from the Fourier series of w₀.
fn fixed_point_oracle(a: &Numra, w0: &Sequence, xi: &FieldElement) -> Complex64 {
    let lf = a.field();
    let d = a.delta_inv_pow(1).unwrap();
    let scale = (a.arity() as f64).sqrt();
    let mut x = xi.clone();
    let mut acc = Complex64::new(1.0, 0.0);
    let mut stable = 0;
    for _ in 0..24 {
        x = lf.mul(d, &x).unwrap();
        let factor = fourier_sequence(a, w0, &x).unwrap() / scale;
        let next = acc * factor;
        stable = if (next - acc).norm() < 1e-15 { stable + 1 } else { 0 };
        acc = next;
        if stable >= 3 {
            break;
        }
    }
    acc
}

fn ac8() -> Outcome {
    let a = numra(2, 1, 1, 1, None);
    let omega = OmegaDomain::working(&a);
    let mut banks = vec![designs::haar(&a).unwrap()];
    for s in 0..10u64 {
        banks.push(designs::random_paraunitary(&a, 1 + (s % 3) as usize, 800 + s).unwrap());
        banks.push(designs::random_gaussian(&a, 1 + (s % 3) as u32, 800 + s).unwrap());
    }
    let (mut taps, mut symbols) = (0.0f64, 0.0f64);
    for bank in &banks {
        let window = bank.max_digits(&a).max(1);
        let syms = bridge::symbols_from_bank(&a, bank).unwrap();
        let res = syms.iter().map(SymbolFunction::resolution).max().unwrap().max(window as i32);
        let stepped = bridge::symbols_as_stepped(&a, &syms, &omega, res).unwrap();
        let rec = bridge::filters_from_numra(&a, &stepped, &omega, window, 1e-12).unwrap();
        for (x, y) in bank.filters.iter().zip(&rec.bank.filters) {
            taps = taps.max(x.sub(y).max_abs());
        }
        symbols = symbols.max(rec.residual);
    }
    ensure(taps < 1e-12, || format!("bank round trip {taps:.3e}"))?;
    ensure(symbols < 1e-12, || format!("symbol round trip {symbols:.3e}"))?;

    let haar = &banks[0];
    let m0 = SymbolFunction::new(&a, &haar.filters[0]).unwrap();
    let region = Region::ball(-1);
    let spec = bridge::cascade_spectrum(&a, &m0, 8, &region, 3).unwrap();
    let (mut vs_oracle, mut oracle_vs_indicator) = (0.0f64, 0.0f64);
    for (xi, v) in spec.cells() {
        let o = fixed_point_oracle(&a, &haar.filters[0], xi);
        vs_oracle = vs_oracle.max((v - o).norm());
        let inside = xi.valuation().is_none_or(|e| e >= 0);
        oracle_vs_indicator = oracle_vs_indicator.max((o - Complex64::new(if inside { 1.0 } else { 0.0 }, 0.0)).norm());
    }
    ensure(oracle_vs_indicator < 1e-8, || format!("fixed-point oracle is {oracle_vs_indicator:.3e} from the D-indicator"))?;
    ensure(vs_oracle < 1e-8, || format!("cascade spectrum is {vs_oracle:.3e} from the oracle"))?;
    Ok(format!(
        "{} banks: taps {taps:.1e}, symbols {symbols:.1e}; cascade J=8 vs oracle {vs_oracle:.1e} on {} cells",
        banks.len(),
        spec.len()
    ))
}

fn ac9() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().map_err(|e| e.to_string())?;
    let mut summary = Vec::new();
    for (p, c, n, r) in [(5u32, 1u32, 2u64, 1u64), (2, 1, 3, 1), (3, 1, 2, 1)] {
        for nu in ["scalar", "coset"] {
            let path = dir.path().join(format!("cfg_{p}_{n}_{nu}.json"));
            std::fs::write(&path, format!(r#"{{"p":{p},"c":{c},"N":{n},"r":{r},"window":2}}"#)).map_err(|e| e.to_string())?;
            for cmd in ["field-info", "basis-check"] {
                let args = ["lw", cmd, "--config", path.to_str().unwrap(), "--nu", nu];
                let first = localwave_cli::run(args);
                let second = single.install(|| localwave_cli::run(args));
                let tag = format!("({p},{c},{n},{r}) {nu} {cmd}");
                ensure(first.code != 2, || format!("{tag}: exit 2: {}", first.stderr))?;
                ensure(first == second, || format!("{tag}: output differs between runs"))?;
                let v: serde_json::Value = serde_json::from_str(&first.stdout).map_err(|e| format!("{tag}: {e}"))?;
                for key in ["schema_version", "params", "checks", "warnings", "data"] {
                    ensure(v.get(key).is_some(), || format!("{tag}: missing {key}"))?;
                }
                let names: Vec<&str> = v["checks"].as_array().unwrap().iter().filter_map(|c| c["check"].as_str()).collect();
                ensure(
                    names.contains(&"character_basis_working_omega") && names.contains(&"character_basis_literal_omega"),
                    || format!("{tag}: basis findings missing"),
                )?;
                ensure(v["data"]["degenerate"].is_boolean(), || format!("{tag}: degeneracy finding missing"))?;
                if cmd == "basis-check" {
                    let ortho = v["checks"][0]["pass"].as_bool().unwrap();
                    summary.push(format!(
                        "({p},{n},{nu}) {}{}",
                        if v["data"]["degenerate"].as_bool().unwrap() { "degenerate" } else { "nondegenerate" },
                        if ortho { "" } else { " non-orthogonal" }
                    ));
                }
            }
        }
    }
    Ok(summary.join("; "))
}

fn main() {
    let suite: [(&str, fn() -> Outcome); 9] = [
        ("AC1 exact algebra", ac1),
        ("AC2 characters", ac2),
        ("AC3 Parseval", ac3),
        ("AC4 Haar end-to-end", ac4),
        ("AC5 oracle equivalence", ac5),
        ("AC6 splitting", ac6),
        ("AC7 fast/slow transform", ac7),
        ("AC8 bridge round trips", ac8),
        ("AC9 nonuniform reports", ac9),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (name, f) in suite {
        let t = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panic".into()))
        });
        let secs = t.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {name} ({secs:.1}s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name} ({secs:.1}s): {detail}");
            }
        }
    }
    println!("acceptance: {} of 9 passed in {:.1}s", 9 - failed, start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
