use std::collections::BTreeSet;
use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use modeq_core::autcomp::{automorphism_group, brute_force_automorphisms, ParameterSet};
use modeq_core::covers::{
    build_torsor_cover, family_sweep, CoverStructure, MainTheoremReport, Verdict,
};
use modeq_core::fostruct::{
    comprehension_set, defined_set, parse_comprehension, parse_formula, DefinableSet, Structure,
};
use modeq_core::imaginaries::{is_zero_definable, quotient_sort, realize_stabilizer};
use modeq_core::morphcat::exact_sequence;
use modeq_core::permgrp::{parse_group_file, Perm};
use modeq_core::sections::{find_sections, section_from_imaginary, section_imaginary};
use modeq_core::towers::{build_tower, check_finitary, inverse_limit_truncation, parse_inclusions};
use modeq_core::{Error, Limits};
use serde_json::json;

use crate::{
    mapfile, Cli, Command, CoverCommand, ImagCommand, MorphMode, Outcome, SectionCommand,
    TowerCommand,
};

/// Largest universe the `--oracle` enumeration will attempt.
const ORACLE_POINTS: usize = 9;

pub fn run(cli: &Cli) -> Result<Outcome> {
    let g = &cli.global;
    let limits = g.limits();
    match &cli.command {
        Command::Aut { file } => aut(file, g.oracle),
        Command::Dcl { file, fix } => dcl(file, fix, g.oracle),
        Command::Orbit { file, tuple } => orbit(file, tuple, g.oracle),
        Command::Imag(ImagCommand::Quotient { file, d, e }) => quotient(file, d, e, &limits),
        Command::Imag(ImagCommand::Stab { file, subgroup }) => stab(file, subgroup, &limits),
        Command::Morph {
            mode,
            source,
            target,
            map,
        } => morph(*mode, source, target, map, &limits),
        Command::Exact { file, sub } => exact(file, sub, &limits),
        Command::Section(SectionCommand::Search { file, sub }) => sections(file, sub, &limits),
        Command::Torsor {
            m,
            n,
            named_point,
            out,
        } => torsor(*m, *n, *named_point, out),
        Command::Cover(CoverCommand::Check { file }) => cover_check(file, &limits),
        Command::MainTheorem {
            family,
            max_m,
            file,
        } => main_theorem(family, *max_m, file.as_deref(), &limits),
        Command::Tower(TowerCommand::Check { dir }) => tower(dir, &limits),
    }
}

fn load(path: &Path) -> Result<Structure> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    Structure::parse(&text).with_context(|| format!("in {}", path.display()))
}

/// Errors that answer the question negatively rather than reject the input.
fn settle<T>(r: modeq_core::Result<T>) -> Result<std::result::Result<T, String>> {
    match r {
        Ok(v) => Ok(Ok(v)),
        Err(
            e @ (Error::NotInvariant(_)
            | Error::NotAnEquivalence(_)
            | Error::NotAnInterpretation(_)
            | Error::NotAnEmbedding(_)
            | Error::NotASubgroup(_)
            | Error::NotAHomomorphism(_)
            | Error::C2Violation(_)
            | Error::MalformedCover(_)
            | Error::LiftNotUnique(_)
            | Error::MissingLift(_)),
        ) => Ok(Err(e.to_string())),
        Err(e) => Err(e.into()),
    }
}

fn failed(instance: &str, why: String) -> Outcome {
    Outcome {
        instances: vec![instance.to_string()],
        text: format!("{instance}: {why}\n"),
        results: json!({ "error": why }),
        verdict: Verdict::Fail,
    }
}

fn cycles(m: &Structure, p: &Perm) -> String {
    p.to_cycle_string(m.element_names())
}

fn names<'a>(m: &'a Structure, xs: impl IntoIterator<Item = &'a usize>) -> Vec<String> {
    xs.into_iter()
        .map(|&x| m.element_name(x).to_string())
        .collect()
}

fn elements(m: &Structure, list: &[String]) -> Result<Vec<usize>> {
    list.iter()
        .map(|x| m.element(x).with_context(|| format!("in {}", m.name())))
        .collect()
}

fn tuple_text(m: &Structure, t: &[usize]) -> String {
    format!("({})", names(m, t).join(","))
}

/// The exhaustive group, or `None` when the universe is too large.
fn oracle_group(m: &Structure, enabled: bool) -> Option<Vec<Perm>> {
    enabled
        .then(|| brute_force_automorphisms(m, ORACLE_POINTS).ok())
        .flatten()
}

fn oracle_verdict(enabled: bool, agrees: Option<bool>) -> Verdict {
    match (enabled, agrees) {
        (false, _) | (true, Some(true)) => Verdict::Pass,
        (true, Some(false)) => Verdict::Fail,
        (true, None) => Verdict::Undecided,
    }
}

fn aut(file: &Path, oracle: bool) -> Result<Outcome> {
    let m = load(file)?;
    let aut = automorphism_group(&m);
    let group = aut.group();
    let gens: Vec<String> = group.generators().iter().map(|p| cycles(&m, p)).collect();
    let orbits: Vec<Vec<String>> = group.orbits().iter().map(|o| names(&m, o)).collect();
    let agrees = oracle_group(&m, oracle)
        .map(|all| all.len() as u128 == group.order() && all.iter().all(|p| group.contains(p)));
    let mut text = format!(
        "{}: |M| = {}, |Aut(M)| = {}\n",
        m.name(),
        m.size(),
        group.order()
    );
    for g in &gens {
        text += &format!("  generator {g}\n");
    }
    for o in &orbits {
        text += &format!("  orbit {{{}}}\n", o.join(", "));
    }
    if let Some(a) = agrees {
        text += &format!("  oracle agrees: {a}\n");
    }
    Ok(Outcome {
        instances: vec![m.name().to_string()],
        results: json!({ "size": m.size(), "order": group.order(), "generators": gens, "orbits": orbits, "oracle_agrees": agrees }),
        verdict: oracle_verdict(oracle, agrees),
        text,
    })
}

fn dcl(file: &Path, fix: &[String], oracle: bool) -> Result<Outcome> {
    let m = load(file)?;
    let a = elements(&m, fix)?;
    let aut = automorphism_group(&m);
    let params = ParameterSet::real(a.iter().copied());
    let closure = aut.dcl(&params)?;
    let fixing = aut.fixing(&params)?;
    let agrees = oracle_group(&m, oracle).map(|all| {
        let fixing_a: Vec<&Perm> = all
            .iter()
            .filter(|p| a.iter().all(|&x| p.fixes(x)))
            .collect();
        let expected: BTreeSet<usize> = (0..m.size())
            .filter(|&x| fixing_a.iter().all(|p| p.fixes(x)))
            .collect();
        expected == closure
    });
    let listed = names(&m, &closure);
    Ok(Outcome {
        instances: vec![m.name().to_string()],
        text: format!(
            "dcl({}) = {{{}}}\n|Aut(M/A)| = {}\n",
            fix.join(", "),
            listed.join(", "),
            fixing.order()
        ),
        results: json!({ "fixed": fix, "dcl": listed, "fixing_order": fixing.order(), "oracle_agrees": agrees }),
        verdict: oracle_verdict(oracle, agrees),
    })
}

fn orbit(file: &Path, tuple: &[String], oracle: bool) -> Result<Outcome> {
    let m = load(file)?;
    let t = elements(&m, tuple)?;
    if t.is_empty() {
        bail!("--tuple needs at least one element");
    }
    let aut = automorphism_group(&m);
    let orbit = aut.group().orbit(&t)?;
    let agrees = oracle_group(&m, oracle).map(|all| {
        all.iter()
            .map(|p| p.apply_tuple(&t))
            .collect::<BTreeSet<_>>()
            == orbit
    });
    let listed: Vec<String> = orbit.iter().map(|u| tuple_text(&m, u)).collect();
    Ok(Outcome {
        instances: vec![m.name().to_string()],
        text: format!(
            "orbit of {} ({} tuples):\n  {}\n",
            tuple_text(&m, &t),
            orbit.len(),
            listed.join(" ")
        ),
        results: json!({ "tuple": tuple, "orbit": listed, "oracle_agrees": agrees }),
        verdict: oracle_verdict(oracle, agrees),
    })
}

fn definable(m: &Structure, text: &str) -> Result<DefinableSet> {
    if text.trim_start().starts_with('{') {
        Ok(comprehension_set(m, &parse_comprehension(text)?)?)
    } else {
        Ok(defined_set(m, &parse_formula(text)?)?)
    }
}

fn quotient(file: &Path, d: &str, e: &str, limits: &Limits) -> Result<Outcome> {
    let m = load(file)?;
    let aut = automorphism_group(&m);
    let d = definable(&m, d).context("in --d")?;
    let e = definable(&m, e).context("in --e")?;
    let sort = match settle(quotient_sort(&aut, &d, &e, limits))? {
        Ok(s) => s,
        Err(why) => return Ok(failed(m.name(), why)),
    };
    let classes: Vec<Vec<String>> = (0..sort.num_classes())
        .map(|c| {
            sort.class_tuples(c)
                .iter()
                .map(|t| tuple_text(&m, t))
                .collect()
        })
        .collect();
    let mut text = format!("{} classes\n", classes.len());
    for (i, c) in classes.iter().enumerate() {
        text += &format!("  [{i}] {}\n", c.join(" "));
    }
    Ok(Outcome {
        instances: vec![m.name().to_string()],
        results: json!({ "classes": classes }),
        verdict: Verdict::Pass,
        text,
    })
}

fn stab(file: &Path, subgroup: &Path, limits: &Limits) -> Result<Outcome> {
    let m = load(file)?;
    let group_text = std::fs::read_to_string(subgroup)
        .with_context(|| format!("cannot read {}", subgroup.display()))?;
    let (name, h) = parse_group_file(&group_text, m.element_names())
        .with_context(|| format!("in {}", subgroup.display()))?;
    let aut = automorphism_group(&m);
    if !h.is_subgroup_of(aut.group()) {
        return Ok(failed(
            m.name(),
            format!("{name} is not a subgroup of Aut(M)"),
        ));
    }
    let a = realize_stabilizer(&aut, &h, limits)?;
    let realized = aut.fixing(&a)?.same_group(&h);
    let zero = is_zero_definable(&aut, &a, limits)?;
    let normal = h.is_normal_in(aut.group());
    let text = format!(
        "{name}: |H| = {}, index {}\n  Aut(M/a) = H: {realized}\n  0-definable: {zero}, normal: {normal}\n",
        h.order(),
        aut.group().order() / h.order()
    );
    Ok(Outcome {
        instances: vec![m.name().to_string()],
        results: json!({ "subgroup": name, "order": h.order(), "realized": realized, "zero_definable": zero, "normal": normal }),
        verdict: if realized && zero == normal {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        text,
    })
}

fn morph(
    mode: MorphMode,
    source: &Path,
    target: &Path,
    map: &Path,
    limits: &Limits,
) -> Result<Outcome> {
    let n = Arc::new(automorphism_group(&load(source)?));
    let m = Arc::new(automorphism_group(&load(target)?));
    let text =
        std::fs::read_to_string(map).with_context(|| format!("cannot read {}", map.display()))?;
    let file = mapfile::parse(&text).with_context(|| format!("in {}", map.display()))?;
    let instance = format!("{} -> {}", n.structure().name(), m.structure().name());
    let g = match mapfile::build(&file, n, m, limits)
        .with_context(|| format!("in {}", map.display()))?
    {
        Ok(g) => g,
        Err(why) => return Ok(failed(&instance, why)),
    };
    if let Err(why) = settle(g.check())? {
        return Ok(failed(&instance, why));
    }
    let embedding = g.is_embedding()?;
    let surjection = g.is_surjection()?;
    let ok = match mode {
        MorphMode::Check => true,
        MorphMode::Embed => embedding,
        MorphMode::Surj => surjection,
        MorphMode::Iso => embedding && surjection,
    };
    Ok(Outcome {
        text: format!(
            "{instance}: interpretation, embedding {embedding}, surjection {surjection}\n"
        ),
        instances: vec![instance],
        results: json!({ "interpretation": true, "embedding": embedding, "surjection": surjection, "carrier": g.carrier().len() }),
        verdict: if ok { Verdict::Pass } else { Verdict::Fail },
    })
}

fn sub_sorts(sub: &[String]) -> Result<Vec<&str>> {
    if sub.is_empty() {
        bail!("--sub needs at least one sort");
    }
    Ok(sub.iter().map(String::as_str).collect())
}

fn exact(file: &Path, sub: &[String], limits: &Limits) -> Result<Outcome> {
    let m = load(file)?;
    let name = m.name().to_string();
    let aut = Arc::new(automorphism_group(&m));
    let seq = match settle(exact_sequence(aut, &sub_sorts(sub)?, limits))? {
        Ok(s) => s,
        Err(why) => return Ok(failed(&name, why)),
    };
    let (total, base, kernel) = (
        seq.total.group().order(),
        seq.base.group().order(),
        seq.kernel.order(),
    );
    Ok(Outcome {
        instances: vec![name.clone()],
        text: format!(
            "{name}: 1 -> Aut(M/N) [{kernel}] -> Aut(M) [{total}] -> Aut(N) [{base}] -> 1\n"
        ),
        results: json!({ "total": total, "base": base, "kernel": kernel, "surjective": seq.restriction.is_surjective() }),
        verdict: Verdict::Pass,
    })
}

fn sections(file: &Path, sub: &[String], limits: &Limits) -> Result<Outcome> {
    let m = load(file)?;
    let name = m.name().to_string();
    let aut = Arc::new(automorphism_group(&m));
    let seq = match settle(exact_sequence(aut, &sub_sorts(sub)?, limits))? {
        Ok(s) => s,
        Err(why) => return Ok(failed(&name, why)),
    };
    let found = find_sections(&seq, limits)?;
    let mut text = format!("{name}: {} section(s)\n", found.len());
    let mut entries = Vec::new();
    let mut all_ok = true;
    let (mm, nn) = (seq.total.structure(), seq.base.structure());
    for (i, s) in found.iter().enumerate() {
        let si = section_imaginary(&seq, s, limits)?;
        let roundtrip = matches!(section_from_imaginary(&seq, &si.parameters, limits), Ok(back) if back.same_as(s));
        let v = &si.verification;
        all_ok &= v.holds() && roundtrip;
        let lifts: Vec<String> = s
            .ghat
            .source()
            .generators()
            .iter()
            .zip(s.ghat.generator_images())
            .map(|(q, l)| format!("{} |-> {}", cycles(nn, q), cycles(mm, l)))
            .collect();
        text += &format!(
            "  [{i}] {}\n      fixing group order {}, generates M: {}, base closure trivial: {}, roundtrip: {roundtrip}{}\n",
            lifts.join("; "),
            si.stabilizer.order(),
            v.generates_total,
            v.base_closure_trivial,
            if v.kmax_binds { " (kmax binds)" } else { "" }
        );
        entries.push(json!({
            "lifts": lifts,
            "stabilizer_order": si.stabilizer.order(),
            "generates_total": v.generates_total,
            "base_closure_trivial": v.base_closure_trivial,
            "kmax_binds": v.kmax_binds,
            "roundtrip": roundtrip,
        }));
    }
    let verdict = match (found.is_empty(), all_ok) {
        (true, _) => Verdict::Vacuous,
        (false, true) => Verdict::Pass,
        (false, false) => Verdict::Fail,
    };
    Ok(Outcome {
        instances: vec![name],
        results: json!({ "count": found.len(), "sections": entries }),
        verdict,
        text,
    })
}

fn torsor(m: usize, n: usize, named: bool, out: &Path) -> Result<Outcome> {
    let cover = build_torsor_cover(m, n, named.then_some(0))?;
    std::fs::write(out, cover.structure().to_text())
        .with_context(|| format!("cannot write {}", out.display()))?;
    let name = cover.name().to_string();
    Ok(Outcome {
        text: format!(
            "wrote {name} ({} elements) to {}\n",
            cover.structure().size(),
            out.display()
        ),
        results: json!({ "instance": name, "size": cover.structure().size(), "path": out.display().to_string() }),
        instances: vec![name],
        verdict: Verdict::Pass,
    })
}

fn report_text(r: &MainTheoremReport) -> String {
    format!(
        "{}: sections {}, definable points [{}], elimination {}{}, verdict {}{}\n",
        r.instance,
        r.sections,
        r.definable_points.join(", "),
        r.elimination,
        if r.elimination_vacuous {
            " (vacuous)"
        } else {
            ""
        },
        serde_json::to_value(r.verdict).unwrap().as_str().unwrap(),
        if r.kmax_binds { " (kmax binds)" } else { "" }
    )
}

fn cover_check(file: &Path, limits: &Limits) -> Result<Outcome> {
    let m = load(file)?;
    let name = m.name().to_string();
    let cover = match settle(CoverStructure::from_structure(m))? {
        Ok(c) => c,
        Err(why) => return Ok(failed(&name, why)),
    };
    let validation = cover.validate()?;
    if !validation.passes() {
        return Ok(Outcome {
            instances: vec![name.clone()],
            text: format!("{name}: not a cover: {validation:?}\n"),
            results: json!({ "validation": validation }),
            verdict: Verdict::Fail,
        });
    }
    let report = cover.main_theorem_report(limits)?;
    let c4 = cover.check_c4(limits)?;
    let text = format!(
        "{name}: covering map, image definable, C1, C2 hold; deck group order {}\n{}C4: deck maps 0-definable in M [{}], in the group [{}]\n",
        cover.gamma.order(),
        report_text(&report),
        c4.m_side.join(", "),
        c4.group_side.join(", ")
    );
    Ok(Outcome {
        instances: vec![name],
        verdict: report.verdict,
        results: json!({ "validation": validation, "deck_order": cover.gamma.order(), "main_theorem": report, "c4": c4 }),
        text,
    })
}

fn main_theorem(
    family: &str,
    max_m: usize,
    file: Option<&Path>,
    limits: &Limits,
) -> Result<Outcome> {
    if let Some(path) = file {
        let m = load(path)?;
        let name = m.name().to_string();
        let cover = match settle(CoverStructure::from_structure(m))? {
            Ok(c) => c,
            Err(why) => return Ok(failed(&name, why)),
        };
        let r = cover.main_theorem_report(limits)?;
        return Ok(Outcome {
            instances: vec![name],
            text: report_text(&r),
            verdict: r.verdict,
            results: serde_json::to_value(&r)?,
        });
    }
    if family != "cyclic" {
        bail!("unknown family `{family}` (available: cyclic)");
    }
    let reports = family_sweep(max_m, limits)
        .into_iter()
        .collect::<modeq_core::Result<Vec<_>>>()?;
    let failures = reports
        .iter()
        .filter(|r| r.verdict != Verdict::Pass)
        .count();
    let mut text: String = reports.iter().map(report_text).collect();
    text += &format!("{} instances, {failures} failing\n", reports.len());
    Ok(Outcome {
        instances: reports.iter().map(|r| r.instance.clone()).collect(),
        verdict: if failures == 0 {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        results: serde_json::to_value(&reports)?,
        text,
    })
}

fn tower(dir: &Path, limits: &Limits) -> Result<Outcome> {
    let mut levels = Vec::new();
    while dir.join(format!("level{}.st", levels.len())).exists() {
        levels.push(load(&dir.join(format!("level{}.st", levels.len())))?);
    }
    if levels.is_empty() {
        bail!("no level0.st in {}", dir.display());
    }
    let map_path = dir.join("inclusions.map");
    let inclusions = if levels.len() > 1 {
        let text = std::fs::read_to_string(&map_path)
            .with_context(|| format!("cannot read {}", map_path.display()))?;
        parse_inclusions(&text, &levels).with_context(|| format!("in {}", map_path.display()))?
    } else {
        Vec::new()
    };
    let instance = dir.display().to_string();
    let t = match settle(build_tower(levels, inclusions, limits))? {
        Ok(t) => t,
        Err(why) => return Ok(failed(&instance, why)),
    };
    let finitary = check_finitary(&t)?;
    let tr = inverse_limit_truncation(&t, t.len() - 1)?;
    let chain: Vec<String> = tr.orders.iter().map(|o| o.to_string()).collect();
    Ok(Outcome {
        instances: vec![instance],
        text: format!(
            "{} levels, |Aut| chain {}, kernels {:?}, finitary {finitary}, coherent {}\n",
            t.len(),
            chain.join(" <- "),
            tr.kernel_orders,
            tr.coherent
        ),
        results: json!({ "orders": tr.orders, "kernel_orders": tr.kernel_orders, "finitary": finitary, "coherent": tr.coherent }),
        verdict: if finitary && tr.coherent {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
    })
}
