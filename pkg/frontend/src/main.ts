// Browser entry: renders the setup form from the service schema, wires the
// what-if button, history table, CSV export and envelope charts.

import { ApiClient } from "./api.js";
import { OperatorConsole } from "./console.js";
import { boundsHint, controllableFactors, emptyField, formValid, setValue, type FieldState } from "./form.js";
import type { FactorSpec, ModelInfo } from "./types.js";

const api = new ApiClient("");
const app = new OperatorConsole(api);

let fields: FieldState[] = [];
let operatingPoint: Record<string, number | string> = {};

function el<K extends keyof HTMLElementTagNameMap>(tag: K, text?: string, cls?: string) {
  const node = document.createElement(tag);
  if (text !== undefined) node.textContent = text;
  if (cls) node.className = cls;
  return node;
}

function renderForm(schema: FactorSpec[], root: HTMLElement) {
  root.textContent = "";
  fields = controllableFactors(schema).map(emptyField);
  operatingPoint = {};
  for (const f of schema.filter((s) => !s.controllable)) {
    // demo default: first state / midpoint; plant wiring would inject these
    operatingPoint[f.name] = f.kind === "discrete" ? f.states[0] : (f.bounds[0] + f.bounds[1]) / 2;
  }

  const opBox = el("div", undefined, "operating-point");
  opBox.appendChild(el("h3", "Operating point (fixed)"));
  for (const [name, value] of Object.entries(operatingPoint)) {
    opBox.appendChild(el("div", `${name}: ${value}`, "op-row"));
  }
  root.appendChild(opBox);

  const formBox = el("div", undefined, "setup-form");
  formBox.appendChild(el("h3", "Candidate setting"));
  fields.forEach((field, i) => {
    const row = el("label", undefined, "field-row");
    row.appendChild(el("span", field.factor.name));
    let input: HTMLInputElement | HTMLSelectElement;
    if (field.factor.kind === "discrete") {
      input = el("select");
      for (const s of field.factor.states) {
        const opt = el("option", s) as HTMLOptionElement;
        opt.value = s;
        input.appendChild(opt);
      }
    } else {
      input = el("input") as HTMLInputElement;
      input.placeholder = boundsHint(field.factor);
    }
    input.addEventListener("input", () => {
      fields[i] = setValue(fields[i], input.value);
      const msg = row.querySelector(".field-msg") as HTMLElement;
      msg.textContent = fields[i].error ?? (fields[i].outOfBounds ? "outside recorded range" : "");
      submit.disabled = !formValid(fields);
    });
    row.appendChild(input);
    row.appendChild(el("span", "", "field-msg"));
    formBox.appendChild(row);
  });

  const submit = el("button", "Evaluate risk") as HTMLButtonElement;
  submit.disabled = !formValid(fields);
  submit.addEventListener("click", () => void onSubmit());
  formBox.appendChild(submit);
  root.appendChild(formBox);
}

async function onSubmit() {
  const gauges = document.getElementById("gauges")!;
  try {
    const outcome = await app.submitWhatif(operatingPoint, fields);
    gauges.textContent = "";
    for (const g of outcome.gauges) {
      const card = el("div", undefined, `gauge ${g.color}`);
      card.appendChild(el("div", g.modelId, "gauge-title"));
      card.appendChild(el("div", g.percentLabel, "gauge-value"));
      card.appendChild(el("div", g.classBadge, "gauge-badge"));
      card.appendChild(el("div", g.confidence, "gauge-confidence"));
      gauges.appendChild(card);
    }
    for (const w of outcome.warnings) gauges.appendChild(el("div", w, "warning"));
    renderHistory();
  } catch {
    renderBanner();
  }
}

function renderBanner() {
  const banner = document.getElementById("banner")!;
  banner.textContent = app.banner ?? "";
  banner.style.display = app.banner ? "block" : "none";
  banner.onclick = () => {
    app.dismissBanner();
    banner.style.display = "none";
  };
}

function renderHistory() {
  const box = document.getElementById("history")!;
  box.textContent = "";
  for (const entry of app.history.list()) {
    const risks = Object.entries(entry.response.results)
      .map(([id, r]) => `${id}: ${Math.round(r.risk * 1000) / 10}%`)
      .join("  ");
    box.appendChild(el("div", `#${entry.index} ${JSON.stringify(entry.setting)} -> ${risks}`, "history-row"));
  }
}

async function renderEnvelopes() {
  const box = document.getElementById("envelopes")!;
  box.textContent = "loading envelope...";
  const charts = await app.envelopes(operatingPoint);
  box.textContent = "";
  for (const chart of charts) {
    const card = el("div", undefined, "envelope");
    card.appendChild(el("h4", chart.factor));
    if (chart.message) {
      card.appendChild(el("div", chart.message, "no-safe-band"));
    } else if (chart.intervalLabel) {
      card.appendChild(el("div", `recommended: ${chart.intervalLabel}`, "recommended"));
    }
    const rows = el("div", undefined, "band");
    for (const p of chart.points) {
      const row = el("div", `${p.level}: [${p.lower.toFixed(3)}, ${p.upper.toFixed(3)}]`, "band-row");
      if (p.shaded) row.className += " shaded";
      rows.appendChild(row);
    }
    card.appendChild(rows);
    box.appendChild(card);
  }
}

async function boot() {
  const models: ModelInfo[] = await api.getModels();
  const selector = document.getElementById("model") as HTMLSelectElement;
  for (const m of models) {
    const opt = el("option", `${m.name} (${m.fusion}, ${m.members} members)`) as HTMLOptionElement;
    opt.value = m.id;
    selector.appendChild(opt);
  }
  renderForm(models[0].schema, document.getElementById("form")!);
  document.getElementById("show-envelopes")!.addEventListener("click", () => void renderEnvelopes());
  document.getElementById("export-csv")!.addEventListener("click", () => {
    const blob = new Blob([app.history.toCsv()], { type: "text/csv" });
    const a = el("a") as HTMLAnchorElement;
    a.href = URL.createObjectURL(blob);
    a.download = "whatif-history.csv";
    a.click();
  });
}

void boot();
