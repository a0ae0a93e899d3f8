"""Plain-text summary of one run, built only from the JSON artifacts."""

from __future__ import annotations


def _fmt_log(x):
    return "n/a" if x is None else f"{x:.6g}"


def render_report(artifacts):
    """Deterministic report; lattice points appear in sorted order."""
    coeffs = artifacts.get("coeffs.json", {})
    cert = artifacts.get("certificate.json", {})
    maj = artifacts.get("majorant.json", {})
    growth = artifacts.get("growth.json", {})
    man = coeffs.get("manifest") or cert.get("manifest") or {}
    out = []
    add = out.append

    add("qgps run report")
    add(f"tool version {man.get('tool_version')}, precision {man.get('precision')} bits, command {man.get('command')}")
    add(f"problem sha256 {man.get('problem_sha256')}")
    params = man.get("parameters") or {}
    if params:
        add("parameters: " + ", ".join(f"{k}={v}" for k, v in sorted(params.items())))
    add("")
    add("equation and seed")
    for line in coeffs.get("problem", "").splitlines():
        if line.startswith(("eq:", "seed:", "q =", "basis")):
            add("  " + line)
    add("")

    if cert:
        add(f"L(xi) = {cert['L_text']}")
        add(f"  stabilization: {cert['L']['stabilization']}")
        add(f"lambda_m = {cert['lambda_m']}")
        c = cert["certificate"]
        add("generators and line margins d_i = Re(a) ln|q| - Im(a) arg q:")
        for g, d in zip(cert["generators"], c["d"]):
            add(f"  {g}: d = {d}")
        add(f"line verdict: {c['verdict']}")
        add(f"certificate: {c['status']}")
        for r in c["reasons"]:
            add(f"  {r}")
        b = cert["assumption_B"]
        add(f"resonance scan: {b['status']} over {b['scanned']} exponents, {len(b['resonances'])} zero(s) of L")
        for r in b["resonances"]:
            add(f"  position {r['position']}: exponent {r['exponent']}")
        add("")

    if coeffs:
        tab = coeffs["table"]
        add(f"coefficient table: degree bound {tab['degree_bound']}, {len(tab['coeffs'])} non-zero coefficients")
        if tab["resonances"]:
            add("resonant points (free coefficients):")
            for r in sorted(tab["resonances"], key=lambda r: r["m"]):
                add(f"  m = {tuple(r['m'])}: {r['name']} = {r['value']['re']} + {r['value']['im']}*i ({r['status']})")
        else:
            add("no resonances in the table")
        rows = sorted(tab["coeffs"], key=lambda r: (sum(r["m"]), r["m"]))
        shown = rows[:12]
        for r in shown:
            add(f"  m = {tuple(r['m'])}  exponent {r['exponent']}  log10|c| = {_fmt_log(r['log10_abs'])}")
        if len(rows) > len(shown):
            add(f"  ... {len(rows) - len(shown)} more in coeffs.json")
        for chk in coeffs.get("checks", []):
            verdict = "passed" if chk["passed"] else "FAILED"
            add(f"{chk['name']}: {verdict} over {chk['terms']} terms (max deviation {chk['max_deviation']})")
        add("")

    if maj:
        if maj["status"] == "computed":
            nu = maj["nu"]
            add(f"nu = {nu['nu']['value'][:24]} ({nu['case']} case, explicit scan to degree M* = {nu['M_star']})")
            res = maj["result"]
            dom = "holds at every point" if res["dominance"] else f"fails first at {tuple(res['first_failure'])}"
            add(f"dominance |c| <= C: {dom} (degree bound {res['degree_bound']})")
            add(f"radius estimate of the majorant: {res['radius_estimate']}")
            if maj.get("reason"):
                add(f"  {maj['reason']}")
        else:
            add(f"majorant: skipped ({maj['reason']})")
        add("")

    if growth:
        if growth["status"] == "computed":
            fit = growth["quadratic_fit"]
            add(f"growth along ray {tuple(growth['ray'])}: {growth['verdict']}")
            add(f"  quadratic exponent a = {fit['a']:.6g} (sigma {growth['sigma_a']:.3g}), b = {fit['b']:.6g}, c = {fit['c']:.6g}")
            order = growth["q_gevrey_order"]
            add(f"  q-Gevrey order estimate: {'n/a' if order is None else f'{order:.6g}'}")
        else:
            add(f"growth: skipped ({growth['reason']})")
    return "\n".join(out).rstrip() + "\n"
