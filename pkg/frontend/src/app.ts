// DOM wiring. All state lives in Session; this file only moves values
// between form controls, the session, and the page.

import { Api } from "./api.js";
import { renderChart } from "./chart.js";
import { scaleLabels } from "./controls.js";
import { fmtNum, relevanceBadge, validationBadge, type Badge } from "./format.js";
import { Session } from "./session.js";
import type { ControlValues, Method, RefbandKind } from "./types.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function numberOrNull(value: string): number | null {
  if (value.trim() === "") return null;
  const x = Number(value);
  return Number.isFinite(x) ? x : null;
}

function paramsSummary(p: ControlValues): string {
  const bits = [`${p.kind}`, `t_A=${fmtNum(p.tA)}`];
  if (p.kind !== "trend") {
    bits.push(`S=[${p.sLower === null ? "auto" : fmtNum(p.sLower)}, ` +
      `${p.sUpper === null ? "auto" : fmtNum(p.sUpper)}]`);
  }
  if (p.kind === "trend" || p.kind === "union") {
    bits.push(`M=[${fmtNum(p.mLower)}, ${fmtNum(p.mUpper)}]`);
  }
  bits.push(`${Math.round((1 - p.alpha) * 100)}%`, p.method);
  return bits.join(", ");
}

export function startApp(): Session {
  const api = new Api("");
  const session = new Session(api);

  const fileInput = el<HTMLInputElement>("file-input");
  const uploadBtn = el<HTMLButtonElement>("upload-btn");
  const demoBtn = el<HTMLButtonElement>("demo-btn");
  const datasetInfo = el<HTMLElement>("dataset-info");
  const status = el<HTMLElement>("status");
  const chart = el<HTMLElement>("chart");
  const badgeValidation = el<HTMLElement>("badge-validation");
  const badgeRelevance = el<HTMLElement>("badge-relevance");
  const badgeDetail = el<HTMLElement>("badge-detail");
  const historyBody = el<HTMLTableSectionElement>("history-body");

  const inputs = {
    kind: el<HTMLSelectElement>("ctl-kind"),
    tA: el<HTMLInputElement>("ctl-ta"),
    sLower: el<HTMLInputElement>("ctl-slower"),
    sUpper: el<HTMLInputElement>("ctl-supper"),
    mLower: el<HTMLInputElement>("ctl-mlower"),
    mUpper: el<HTMLInputElement>("ctl-mupper"),
    alpha: el<HTMLSelectElement>("ctl-alpha"),
    method: el<HTMLSelectElement>("ctl-method"),
  };

  function readControls(): Partial<ControlValues> {
    const patch: Partial<ControlValues> = {
      kind: inputs.kind.value as RefbandKind,
      sLower: numberOrNull(inputs.sLower.value),
      sUpper: numberOrNull(inputs.sUpper.value),
      alpha: Number(inputs.alpha.value),
      method: inputs.method.value as Method,
    };
    const tA = numberOrNull(inputs.tA.value);
    if (tA !== null) patch.tA = tA;
    const mLower = numberOrNull(inputs.mLower.value);
    if (mLower !== null) patch.mLower = mLower;
    const mUpper = numberOrNull(inputs.mUpper.value);
    if (mUpper !== null) patch.mUpper = mUpper;
    return patch;
  }

  function syncControls(): void {
    const p = session.params;
    inputs.kind.value = p.kind;
    inputs.tA.value = String(p.tA);
    inputs.sLower.value = p.sLower === null ? "" : String(p.sLower);
    inputs.sUpper.value = p.sUpper === null ? "" : String(p.sUpper);
    inputs.mLower.value = String(p.mLower);
    inputs.mUpper.value = String(p.mUpper);
    inputs.alpha.value = String(p.alpha);
    inputs.method.value = p.method;
    const [lowerLabel, upperLabel] = scaleLabels(p.kind);
    el<HTMLElement>("lab-slower").textContent = lowerLabel;
    el<HTMLElement>("lab-supper").textContent = upperLabel;
    const scalesOff = p.kind === "trend";
    const slopesOff = p.kind === "anticipation" || p.kind === "constant";
    inputs.sLower.disabled = scalesOff;
    inputs.sUpper.disabled = scalesOff;
    inputs.mLower.disabled = slopesOff;
    inputs.mUpper.disabled = slopesOff;
  }

  function setBadge(node: HTMLElement, badge: Badge | null): void {
    if (!badge) {
      node.textContent = "—";
      node.className = "badge";
      return;
    }
    node.textContent = badge.label;
    node.className = "badge " + (badge.ok ? "badge-ok" : "badge-bad");
  }

  function renderHistory(): void {
    historyBody.textContent = "";
    session.history.forEach((entry, index) => {
      const row = document.createElement("tr");
      const cells = [
        String(index + 1),
        paramsSummary(entry.params),
        entry.outcome.kind === "result"
          ? (entry.outcome.validated ? "validated" : "not validated") +
            " / " +
            (entry.outcome.rejected ? "significant" : "not significant")
          : "error: " + entry.outcome.message,
      ];
      for (const text of cells) {
        const td = document.createElement("td");
        td.textContent = text;
        row.appendChild(td);
      }
      const actions = document.createElement("td");
      const replayBtn = document.createElement("button");
      replayBtn.type = "button";
      replayBtn.textContent = "replay";
      replayBtn.addEventListener("click", () => session.replay(index));
      actions.appendChild(replayBtn);
      row.appendChild(actions);
      historyBody.appendChild(row);
    });
  }

  session.onChange((event) => {
    if (event === "dataset") {
      const d = session.dataset!;
      datasetInfo.textContent =
        `${d.n_units} units × ${d.n_periods} periods, ${d.design} design ` +
        `(id ${d.id})`;
      status.textContent = "estimating…";
      return;
    }
    if (event === "pending") {
      syncControls();
      status.textContent = "computing…";
      badgeValidation.classList.add("stale");
      badgeRelevance.classList.add("stale");
      return;
    }
    badgeValidation.classList.remove("stale");
    badgeRelevance.classList.remove("stale");
    if (event === "result") {
      const { response } = session.current!;
      status.textContent = "";
      chart.innerHTML = renderChart(response);
      const validation = validationBadge(response.equivalence);
      const relevance = relevanceBadge(response.relevance);
      setBadge(badgeValidation, validation);
      setBadge(badgeRelevance, relevance);
      badgeDetail.textContent = `${validation.detail}; ${relevance.detail}`;
      renderHistory();
      return;
    }
    // error
    status.textContent = session.lastError ?? "request failed";
    setBadge(badgeValidation, null);
    setBadge(badgeRelevance, null);
    badgeDetail.textContent = "";
    renderHistory();
  });

  for (const input of Object.values(inputs)) {
    input.addEventListener("change", () => session.setParams(readControls()));
  }
  // sliders and number spinners also fire while dragging
  for (const input of [inputs.tA, inputs.sLower, inputs.sUpper,
                       inputs.mLower, inputs.mUpper]) {
    input.addEventListener("input", () => session.setParams(readControls()));
  }

  uploadBtn.addEventListener("click", () => {
    const file = fileInput.files?.[0];
    if (!file) {
      status.textContent = "choose a CSV file first";
      return;
    }
    status.textContent = "uploading…";
    session.uploadFile(file, file.name).catch((err) => {
      status.textContent = String(err instanceof Error ? err.message : err);
    });
  });

  demoBtn.addEventListener("click", () => {
    status.textContent = "loading demo panel…";
    session.uploadDemo().catch((err) => {
      status.textContent = String(err instanceof Error ? err.message : err);
    });
  });

  syncControls();
  return session;
}

startApp();
