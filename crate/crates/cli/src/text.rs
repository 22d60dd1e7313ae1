use std::fmt::Write;

use serde_json::Value;

fn st(v: &Value) -> &str {
    v.as_str().unwrap_or("")
}

fn arr(v: &Value) -> &[Value] {
    v.as_array().map_or(&[], Vec::as_slice)
}

fn join(v: &Value) -> String {
    arr(v).iter().map(|x| x.as_str().map_or_else(|| x.to_string(), str::to_string)).collect::<Vec<_>>().join(", ")
}

fn chain(out: &mut String, v: &Value) {
    for c in arr(v) {
        let _ = writeln!(out, "  {} [{}]: {}", st(&c["label"]), st(&c["origin"]), st(&c["expr"]));
    }
}

fn table(out: &mut String, t: &Value) {
    let basis: Vec<&str> = arr(&t["basis"]).iter().map(st).collect();
    let rows = arr(&t["entries"]);
    let mut any = false;
    for (i, row) in rows.iter().enumerate() {
        for (j, e) in arr(row).iter().enumerate().skip(i + 1) {
            if st(e) != "0" {
                any = true;
                let _ = writeln!(out, "  {{{}, {}}} = {}", basis[i], basis[j], st(e));
            }
        }
    }
    if !any {
        let _ = writeln!(out, "  all brackets vanish");
    }
}

fn levels(out: &mut String, v: &Value) {
    for l in arr(v) {
        let _ = writeln!(
            out,
            "level {}  [{}]  det = {}",
            l["index"],
            join(&l["variables"]),
            st(&l["determinant"])
        );
        for (k, z) in arr(&l["zero_modes"]).iter().enumerate() {
            let _ = writeln!(out, "  mode {k}: ({})", join(&z["components"]));
        }
        for c in arr(&l["candidates"]) {
            if let Some(e) = c["constraint"].as_str() {
                let _ = writeln!(out, "  {} = {}", c["label"].as_str().unwrap_or("?"), e);
            }
        }
        let d = &l["disposition"];
        let labels = join(&d["labels"]);
        if labels.is_empty() {
            let _ = writeln!(out, "  {}", st(&d["kind"]));
        } else {
            let _ = writeln!(out, "  {}: {labels}", st(&d["kind"]));
        }
    }
}

fn verdict(out: &mut String, v: &Value) {
    let _ = writeln!(out, "verdict: {}", st(&v["kind"]));
    match st(&v["kind"]) {
        "brackets" => table(out, &v["table"]),
        "symmetry" => {
            let g = &v["generator"];
            let _ = writeln!(out, "  generator over [{}]: ({})", join(&g["variables"]), join(&g["components"]));
            let _ = writeln!(out, "  delta V = {}", st(&v["delta_v"]));
        }
        "inconsistent" => {
            if let Some(x) = v["value"].as_str() {
                let _ = writeln!(out, "  {x} = 0 is required");
            }
        }
        _ => {}
    }
    if let Some(m) = v["message"].as_str() {
        let _ = writeln!(out, "  {m}");
    }
}

fn tail(out: &mut String, r: &Value) {
    if let Some(h) = r["hamiltonian"].as_str() {
        let _ = writeln!(out, "hamiltonian: {h}");
    }
    let rules = arr(&r["rewrite_rules"]["rules"]);
    if !rules.is_empty() {
        let _ = writeln!(out, "rewrite rules:");
        for x in rules {
            let _ = writeln!(out, "  {}", st(x));
        }
        if let Some(b) = r["rewrite_rules"]["branches"].as_object() {
            for (k, s) in b {
                let _ = writeln!(out, "  branch {k}: {}", st(s));
            }
        }
    }
}

fn dirac(out: &mut String, d: &Value) {
    if let Some(h) = d["hamiltonian_canonical"].as_str() {
        let _ = writeln!(out, "canonical hamiltonian: {h}");
    }
    let classes = arr(&d["classification"]);
    for (c, k) in arr(&d["chain"]).iter().zip(classes) {
        let _ = writeln!(
            out,
            "  {} [{}, {}]: {}",
            st(&c["label"]),
            st(&c["origin"]),
            st(&k["class"]),
            st(&c["expr"])
        );
    }
    verdict(out, &d["verdict"]);
    if let Some(h) = d["hamiltonian"].as_str() {
        let _ = writeln!(out, "reduced hamiltonian: {h}");
    }
    for g in arr(&d["generators"]) {
        let vars: Vec<String> = arr(&g["variations"])
            .iter()
            .map(|a| format!("d{} = {}", st(&a["symbol"]), st(&a["value"])))
            .collect();
        let _ = writeln!(out, "generator {}: {}; dH = {}", st(&g["constraint"]), vars.join(", "), st(&g["delta_h"]));
    }
}

fn eom(out: &mut String, e: &Value) {
    let _ = writeln!(out, "equations of motion:");
    for q in arr(&e["equations"]) {
        let _ = writeln!(out, "  d{}/dt = {}", st(&q["symbol"]), st(&q["rate"]));
    }
    let _ = writeln!(out, "conserved (degree {}): {}", e["degree"], join(&e["conserved"]));
    if let Some(p) = e["promotion"].as_object() {
        let c = &p["constraint"];
        let _ = writeln!(out, "promoted {}: {} = {}", st(&p["source"]), st(&c["label"]), st(&c["expr"]));
    }
}

fn comparison(out: &mut String, c: &Value) {
    let _ = writeln!(out, "comparison: {} difference(s)", c["differences"]);
    for r in arr(&c["chain"]) {
        let with = r["matched_with"].as_str().map(|w| format!(" ~ {w}")).unwrap_or_default();
        let _ = writeln!(
            out,
            "  {:<10} {:<8} {}{with}: {}",
            st(&r["side"]),
            st(&r["label"]),
            st(&r["status"]),
            st(&r["expr"])
        );
    }
    match c["table_differences"].as_array() {
        None => {
            let _ = writeln!(out, "  no symplectic bracket table");
        }
        Some(d) if d.is_empty() => {
            let _ = writeln!(out, "  bracket tables agree on [{}]", join(&c["compared_symbols"]));
        }
        Some(d) => {
            for x in d {
                let _ = writeln!(
                    out,
                    "  {{{}, {}}}: dirac {} vs symplectic {}",
                    st(&x["a"]),
                    st(&x["b"]),
                    st(&x["dirac"]),
                    st(&x["symplectic"])
                );
            }
        }
    }
}

pub fn render(r: &Value) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "model {} ({})", st(&r["model"]), st(&r["algorithm"]));
    if st(&r["engine"]) == "dirac" {
        dirac(&mut out, r);
    } else {
        levels(&mut out, &r["levels"]);
        let _ = writeln!(out, "chain:");
        chain(&mut out, &r["chain"]);
        verdict(&mut out, &r["verdict"]);
        tail(&mut out, r);
        if r["eom"].is_object() {
            eom(&mut out, &r["eom"]);
        }
        if r["dirac"].is_object() {
            let _ = writeln!(out, "dirac:");
            dirac(&mut out, &r["dirac"]);
        }
        if r["comparison"].is_object() {
            comparison(&mut out, &r["comparison"]);
        }
    }
    let checks = arr(&r["checks"]);
    let passed = checks.iter().filter(|c| c["passed"] == Value::Bool(true)).count();
    let _ = writeln!(out, "checks: {passed}/{} passed", checks.len());
    for c in checks.iter().filter(|c| c["passed"] != Value::Bool(true)) {
        let _ = writeln!(out, "  FAILED {} on {}", st(&c["check"]), st(&c["subject"]));
    }
    out
}
