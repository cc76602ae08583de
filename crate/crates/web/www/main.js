import init, { analyseGrid, analyseQuadnet, workedExample } from "./pkg/quadnet_web.js";

const $ = (id) => document.getElementById(id);

function row(name, value, cls) {
  const tr = document.createElement("tr");
  const a = document.createElement("td");
  const b = document.createElement("td");
  a.textContent = name;
  b.textContent = value;
  if (cls) b.className = cls;
  tr.append(a, b);
  return tr;
}

function path(p) {
  return p.path ? `${p.path.join(" → ")}  (length ${p.length.toFixed(6)})` : p.absent;
}

function show(json) {
  const out = JSON.parse(json);
  const r = out.report;
  $("figure").innerHTML = out.svg;
  const table = $("summary");
  table.replaceChildren(
    row("energy I(f)", r.energy),
    row("m, M, k", `${r.m.toFixed(6)}, ${r.M.toFixed(6)}, ${r.k}`),
    row("vertical", path(r.vertical)),
    row("horizontal", path(r.horizontal)),
    row("lower bound (vertical)", r.bounds.theoremVertical.toFixed(6)),
    row("lower bound (horizontal)", r.bounds.theoremHorizontal.toFixed(6)),
    row("product", r.bounds.product === null ? "-" : r.bounds.product.toFixed(6)),
    row("all verdicts", r.verdicts.all ? "pass" : "fail", r.verdicts.all ? "pass" : "fail"),
  );
  if (out.reconstruction) {
    const rec = out.reconstruction;
    table.append(row("reconstruction", `${rec.linkOrders} link orders, ${rec.solvedLeaves} leaves, ${rec.matches} matches, ${rec.distinctSignatures} class`));
    for (const c of out.checks) table.append(row(c.name, c.detail, c.ok ? "pass" : "fail"));
  }
  $("raw").textContent = JSON.stringify(r, null, 2);
  $("error").textContent = "";
}

function guarded(f) {
  try {
    show(f());
  } catch (e) {
    $("error").textContent = e.message ?? String(e);
  }
}

await init();

$("grid-form").addEventListener("submit", (ev) => {
  ev.preventDefault();
  const f = new FormData(ev.target);
  guarded(() => analyseGrid(
    Number(f.get("rows")), Number(f.get("cols")), f.get("diagonal"),
    Number(f.get("seed")), f.get("unit") !== null, f.get("exact") !== null,
  ));
});

$("text-form").addEventListener("submit", (ev) => {
  ev.preventDefault();
  const f = new FormData(ev.target);
  guarded(() => analyseQuadnet(f.get("text"), f.get("exact") !== null));
});

$("example").addEventListener("click", () => guarded(workedExample));

$("grid-form").requestSubmit();
