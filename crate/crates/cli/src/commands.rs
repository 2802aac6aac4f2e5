use num_bigint::BigInt;
use octak::field::{pythag_factor, FieldDescriptor};
use octak::ktheory::{ah_e2_page, compact, k_group, unit_group_structure, K2_NOTE};
use octak::omod::{is_cofibration, is_monomorphism, parse_matrix, pushout, Certificate, Matrix};
use octak::residue::{enumerate_faces, k0_f_infinity, k0_reduce, module_image, project, SignMatrix};
use octak::sconstr::enumerate_s_objects;
use octak::wreath::{
    brute_abelianization, commutator_table_check, derived_subgroup, hyperoctahedral_table, DEFAULT_BUDGET,
};
use octak::{AbGroupDescriptor, Face};
use serde_json::{json, Value};

use crate::report::{table, CliError, Outcome, Status};

type Run = Result<Outcome, CliError>;

fn module_matrix(field: FieldDescriptor, text: &str, flag: &str) -> Result<Matrix<BigInt>, CliError> {
    let k = parse_matrix::<BigInt>(field, text).map_err(|e| CliError::Usage(format!("--{flag} {e}")))?;
    Ok(Matrix::from_k(k)?)
}

fn refusal(kind: &str, witness: String, mut extra: Value) -> Outcome {
    extra["reason"] = json!(kind);
    extra["witness"] = json!(witness);
    Outcome::new(Status::Fail, extra, format!("not a cofibration: {witness}"))
}

pub fn check_cofib(field: FieldDescriptor, matrix: &str) -> Run {
    let a = module_matrix(field, matrix, "matrix")?;
    let mono = is_monomorphism(&a);
    Ok(match is_cofibration(&a) {
        Ok(c) => Outcome::new(
            Status::Pass,
            json!({ "certificate": c.to_json(), "cokernel_rank": c.cokernel().0, "is_monomorphism": mono }),
            format!("cofibration O({}) >-> O({}) with free cokernel of rank {}", c.source_rank(), c.target_rank(), c.cokernel().0),
        ),
        Err(r) => refusal(r.kind(), r.to_string(), json!({ "is_monomorphism": mono })),
    })
}

pub fn split(field: FieldDescriptor, matrix: &str) -> Run {
    let a = module_matrix(field, matrix, "matrix")?;
    let c = match is_cofibration(&a) {
        Ok(c) => c,
        Err(r) => return Ok(refusal(r.kind(), r.to_string(), json!({}))),
    };
    let phi = c.splitting_iso();
    let (rank, projection) = c.cokernel();
    let inclusion = Certificate::<BigInt>::inclusion(field, c.source_rank(), c.target_rank()).to_matrix();
    let commutes = phi.compose(&a)? == inclusion;
    Ok(Outcome::pass_if(
        commutes,
        json!({
            "certificate": c.to_json(),
            "splitting_iso": phi.to_json(),
            "cokernel_rank": rank,
            "cokernel_projection": projection.to_json(),
            "diagram_commutes": commutes,
        }),
        format!("O({}) = O({}) + O({}) via the splitting isomorphism", c.target_rank(), c.source_rank(), rank),
    ))
}

pub fn pushout_cmd(field: FieldDescriptor, cofib: &str, map: &str) -> Run {
    let a = module_matrix(field, cofib, "cofib")?;
    let c = match is_cofibration(&a) {
        Ok(c) => c,
        Err(r) => return Ok(refusal(r.kind(), r.to_string(), json!({}))),
    };
    let f = module_matrix(field, map, "map")?;
    let po = pushout(&c, &f)?;
    let commutes = po.square_commutes()?;
    let result = is_cofibration(&po.cofib.to_matrix());
    let rank_after = result.as_ref().map(|r| r.cokernel().0).ok();
    let ok = commutes && rank_after == Some(c.cokernel().0);
    Ok(Outcome::pass_if(
        ok,
        json!({
            "cofib": po.cofib.to_json(),
            "attach": po.attach.to_json(),
            "square_commutes": commutes,
            "is_cofibration": result.is_ok(),
            "cokernel_rank_before": c.cokernel().0,
            "cokernel_rank_after": rank_after,
        }),
        if ok {
            "cobase change is a cofibration with the same cokernel".to_string()
        } else {
            "cobase change failed".to_string()
        },
    ))
}

fn expected_abelianization(n: usize, w: u32) -> AbGroupDescriptor {
    match n {
        0 => AbGroupDescriptor::trivial(),
        1 => AbGroupDescriptor::cyclic(w as u64),
        _ => AbGroupDescriptor::cyclic(w as u64).direct_sum(&AbGroupDescriptor::cyclic(2)),
    }
}

pub fn gl_ab(n: usize, w: u32) -> Run {
    let g = hyperoctahedral_table(n, w, DEFAULT_BUDGET)?;
    let ab = brute_abelianization(n, w, DEFAULT_BUDGET)?;
    let expected = expected_abelianization(n, w);
    Ok(Outcome::pass_if(
        ab == expected,
        json!({
            "order": g.order(),
            "abelianization": ab.torsion_list().unwrap_or_default(),
            "descriptor": ab.to_string(),
            "expected": expected.to_string(),
        }),
        format!("GL_{n}(O)_ab = {ab} for |E| = {w}"),
    ))
}

pub fn perfect(n: usize, w: u32) -> Run {
    let g = hyperoctahedral_table(n, w, DEFAULT_BUDGET)?;
    let h = derived_subgroup(&g, DEFAULT_BUDGET)?;
    let hh = derived_subgroup(&h, DEFAULT_BUDGET)?;
    let perfect = hh.order() == h.order();
    let mut payload = json!({
        "order": g.order(),
        "derived_order": h.order(),
        "index": g.order() / h.order(),
        "second_derived_order": hh.order(),
        "perfect": perfect,
    });
    if !perfect {
        payload["witness"] = json!(format!("[H, H] has order {} < |H| = {}", hh.order(), h.order()));
    }
    Ok(Outcome::pass_if(
        perfect,
        payload,
        format!("[G, G] has order {} and is {}perfect", h.order(), if perfect { "" } else { "not " }),
    ))
}

pub fn commutator_table(n: usize, w: u32) -> Run {
    let results = commutator_table_check(n, w);
    let rows: Vec<Value> = results
        .iter()
        .map(|r| json!({ "case": r.case.label(), "checked": r.checked, "failures": r.failures }))
        .collect();
    let ok = results.iter().all(|r| r.passed());
    let mut payload = json!({ "cases": rows });
    if let Some(r) = results.iter().find(|r| !r.passed()) {
        payload["witness"] = json!(match &r.first_failure {
            Some(f) => format!("{}: {f}", r.case.label()),
            None => format!("{}: not exercised at n = {n}", r.case.label()),
        });
    }
    let md = table(
        &["case", "checked", "failures"],
        &results.iter().map(|r| vec![r.case.label().to_string(), r.checked.to_string(), r.failures.to_string()]).collect::<Vec<_>>(),
    );
    let total: usize = results.iter().map(|r| r.checked).sum();
    Ok(Outcome::pass_if(ok, payload, format!("{total} commutators [tau_i, f_j] against six cases")).with_markdown(md))
}

pub fn k0_finf() -> Run {
    let k0 = k0_f_infinity()?;
    let sequences: Vec<Value> = k0.ledger.relations.iter().map(|r| r.to_json()).collect();
    let ok = k0.group.is_trivial();
    Ok(Outcome::pass_if(
        ok,
        json!({
            "group": k0.group.to_string(),
            "relations": k0.ledger.relations.len(),
            "sequences": sequences,
            "free_reduction": k0.free_reduction.to_json(),
        }),
        format!("[F_inf(2)] = {}[F_inf] and [F_inf(2)] = 3[F_inf], so K_0(F_inf) = {}", k0.free_reduction.multiple, k0.group),
    ))
}

pub fn faces(n: usize) -> Run {
    let all = enumerate_faces(n)?;
    let roundtrip = all.iter().all(|f| project(&f.barycentric_lift::<BigInt>()) == *f);
    let expected = 3usize.pow(n as u32);
    Ok(Outcome::pass_if(
        all.len() == expected && roundtrip,
        json!({
            "n": n,
            "count": all.len(),
            "lift_roundtrip": roundtrip,
            "faces": all.iter().map(Face::to_string).collect::<Vec<_>>(),
        }),
        format!("F_inf({n}) has {} faces", all.len()),
    ))
}

pub fn k0_reduce_cmd(pattern: &str) -> Run {
    let a: SignMatrix = pattern.parse().map_err(|e| CliError::Usage(format!("--pattern {e}")))?;
    let module = module_image(&a)?;
    let trace = k0_reduce(&a)?;
    trace.verify()?;
    Ok(Outcome::new(
        Status::Pass,
        json!({
            "pattern": a.to_string(),
            "module": module.to_json(),
            "size": module.len(),
            "multiple": trace.multiple,
            "trace": trace.to_json(),
        }),
        format!("[im {a}] = {}[F_inf]", trace.multiple),
    ))
}

pub fn k_groups(field: FieldDescriptor, max_degree: usize) -> Run {
    let mut groups = serde_json::Map::new();
    let mut rows = Vec::new();
    for i in 0..=max_degree {
        let g = k_group(&field, i)?;
        groups.insert(format!("K_{i}"), json!(g.to_string()));
        rows.push(vec![format!("K_{i}"), compact(&g)]);
    }
    let units = unit_group_structure(&field).descriptor();
    let mut payload = json!({ "field": field.to_string(), "unit_group": units.to_string(), "groups": groups });
    if max_degree >= 2 {
        payload["k2_note"] = json!(K2_NOTE);
    }
    let md = table(&["degree", "group"], &rows);
    Ok(Outcome::new(Status::Pass, payload, format!("K-groups of O_{field} up to degree {max_degree}")).with_markdown(md))
}

pub fn ah_table(w: u64, pmax: usize, qmax: usize) -> Run {
    let page = ah_e2_page(w, pmax, qmax)?;
    Ok(Outcome::new(Status::Pass, page.to_json(), format!("E^2 page of H_p(Z/{w}; pi_q^s)")).with_markdown(page.to_markdown()))
}

pub fn pythag(x: &str) -> Run {
    let field = FieldDescriptor::Gaussian;
    let value = field.parse_element::<BigInt>(x).map_err(|e| CliError::Usage(format!("--x {e}")))?;
    let f = pythag_factor(&value)?;
    let back = f.recompose();
    let exponents: serde_json::Map<String, Value> = f.exponents.iter().map(|(p, e)| (p.to_string(), json!(e))).collect();
    let terms: Vec<String> = f
        .exponents
        .keys()
        .zip(f.exponents.values())
        .map(|(p, e)| {
            let conj = p.to_string().replacen('+', "-", 1);
            format!("(({p})/({conj}))^{e}")
        })
        .collect();
    let shown = if terms.is_empty() { "1".to_string() } else { terms.join(" * ") };
    Ok(Outcome::pass_if(
        back == value,
        json!({
            "x": field.format(&value),
            "unit": format!("i^{}", f.unit),
            "exponents": exponents,
            "recomposed": field.format(&back),
        }),
        format!("{} = i^{} * {shown}", field.format(&value), f.unit),
    ))
}

pub fn sconstr_count(n: usize, rank: usize, w: u32) -> Run {
    let census = enumerate_s_objects::<i64>(n, rank, w, 10_000_000)?;
    let ok = census.bijective && census.free_total == census.eset_total;
    let rows: Vec<Vec<String>> = census
        .by_ranks
        .iter()
        .map(|(r, (f, e))| vec![format!("{r:?}"), f.to_string(), e.to_string()])
        .collect();
    let md = table(&["r_01, ..., r_0n", "Free(O)", "pointed E-sets"], &rows);
    Ok(Outcome::pass_if(
        ok,
        census.to_json(),
        format!("S_{n} objects with total rank <= {rank}: {} over Free(O), {} over pointed E-sets", census.free_total, census.eset_total),
    )
    .with_markdown(md))
}
