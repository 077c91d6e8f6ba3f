//! Plain-text rendering of certificates. Takes `&Certificate` only.

use std::fmt::Write;

use stabcert::certificate::{CheckStatus, OverallStatus, Section};
use stabcert::iteration::RecursionRun;
use stabcert::optimizer::SearchResult;
use stabcert::Certificate;

fn status_label(s: CheckStatus) -> &'static str {
    match s {
        CheckStatus::Pass => "pass",
        CheckStatus::Fail => "FAIL",
        CheckStatus::Discrepancy => "DISCREPANCY",
        CheckStatus::NotApplicable => "n/a",
    }
}

fn overall_label(s: OverallStatus) -> &'static str {
    match s {
        OverallStatus::Pass => "pass",
        OverallStatus::PassWithDiscrepancies => "pass with discrepancies",
        OverallStatus::Fail => "FAIL",
    }
}

pub fn section(out: &mut String, s: &Section, verbose: bool) {
    let _ = writeln!(out, "== {} ==", s.name);
    if let Some(p) = &s.params {
        let _ = writeln!(
            out,
            "params: n = {}, a = {}, b = {}, alpha = {}, beta = {}",
            p.n(),
            p.a(),
            p.b(),
            p.alpha(),
            p.beta()
        );
    }
    if verbose && !s.values.is_empty() {
        let _ = writeln!(out, "values:");
        for (k, v) in &s.values {
            let _ = writeln!(out, "  {k} = {v}");
        }
    }
    for c in &s.checks {
        let _ = writeln!(out, "  [{}] {}: {}", status_label(c.status), c.name, c.value);
    }
    for r in &s.reference_values {
        let tag = if r.matches { "match" } else { "DISCREPANCY" };
        let _ = writeln!(out, "  [{tag}] {}: quoted {}, computed {}", r.quantity, r.quoted, r.computed);
    }
    for f in &s.flags {
        let _ = writeln!(out, "  [flag] {}: {}", f.name, f.detail);
    }
}

pub fn search(out: &mut String, r: &SearchResult) {
    let _ = writeln!(out, "== search n={} ({:?}) ==", r.n, r.objective);
    let p = &r.best_params;
    let _ = writeln!(
        out,
        "best: a = {}, b = {}, alpha = {}, beta = {}",
        p.a(),
        p.b(),
        p.alpha(),
        p.beta()
    );
    let _ = writeln!(out, "certified: {}", r.certified);
    let _ = writeln!(out, "delta0 = {} (~{:.6})", r.delta0, r.delta0.to_f64());
    if let Some(e) = &r.epsilon {
        let _ = writeln!(out, "epsilon = {e} (~{:.6e})", e.to_f64());
    }
    if let Some(i) = &r.improvement_vs_reference {
        let _ = writeln!(out, "improvement over built-in row: {i} (~{:.6e})", i.to_f64());
    }
    let _ = writeln!(out, "evaluations: {}", r.evaluations);
    for c in &r.constraint_report.constraints {
        let _ = writeln!(out, "  {} = {}", c.name, c.margin);
    }
    if !r.margin_profile.is_empty() {
        let _ = writeln!(out, "normalized margins:");
        for m in &r.margin_profile {
            let _ = writeln!(out, "  {:<40} {:+.6e}", m.constraint, m.normalized_margin);
        }
    }
}

pub fn recursion(out: &mut String, run: &RecursionRun) {
    let i = &run.input;
    let _ = writeln!(
        out,
        "== recursion n={} S1={:e} C0={:e} log2 C={} ==",
        i.n, i.s1, i.c0, i.log2_c
    );
    let _ = writeln!(out, "ln(C0^(n/2) C^(n^2/2) S1) = {:.6e}", run.ln_bound_base);
    let _ = writeln!(out, "{:>4}  {:>16}  {:>16}  ok", "l", "ln S_(2l+1)", "ln bound");
    for s in &run.steps {
        let _ = writeln!(
            out,
            "{:>4}  {:>16.6e}  {:>16.6e}  {}",
            s.l,
            s.ln_s,
            s.ln_bound,
            if s.within_bound { "yes" } else { "NO" }
        );
    }
    let _ = writeln!(
        out,
        "within bound: {}, exponents consistent: {}, tends to 0: {}",
        run.all_within_bound, run.exponents_consistent, run.tends_to_zero
    );
}

pub fn certificate(cert: &Certificate, verbose: bool) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "certificate schema {} | command: {}", cert.schema_version, cert.command);
    let _ = writeln!(out, "environment:");
    for (k, v) in &cert.environment.entries {
        let _ = writeln!(out, "  {k} = {v}");
    }
    for s in &cert.sections {
        section(&mut out, s, verbose);
    }
    if let Some(r) = &cert.search {
        search(&mut out, r);
    }
    for run in cert.recursion.iter().flatten() {
        recursion(&mut out, run);
    }
    let d = cert.discrepancies();
    if d.is_empty() {
        let _ = writeln!(out, "discrepancies: none");
    } else {
        let _ = writeln!(out, "discrepancies:");
        for x in d {
            let _ = writeln!(out, "  {x}");
        }
    }
    let _ = writeln!(out, "status: {}", overall_label(cert.status));
    out
}
