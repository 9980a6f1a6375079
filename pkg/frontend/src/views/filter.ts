/**
 * Filter view: combinable criteria (creation period, concept frequency or
 * confidence, video or fixed-length segment units) mapping one-to-one onto
 * the /filter parameters. The URL encodes exactly the criteria the user
 * set; inverted ranges are blocked client-side before any request.
 */
import { clear, el, option } from "../dom.js";
import type { FilterParams, FilterRow, FilterViewState } from "../types.js";
import { FILTER_MODES, FILTER_ORDERS, FILTER_UNITS } from "../types.js";
import { View } from "./base.js";

const isSegmentRow = (row: FilterRow): row is Extract<FilterRow, { segIndex: number }> =>
  "segIndex" in row;

export class FilterView extends View<FilterViewState> {
  private form = el("form", { class: "criteria" });
  private yearFrom = el("input", { name: "yearFrom", type: "number", placeholder: "year from" });
  private yearTo = el("input", { name: "yearTo", type: "number", placeholder: "year to" });
  private concepts = el("input", { name: "concepts", placeholder: "concepts, comma separated" });
  private mode = el("select", { name: "mode" });
  private unit = el("select", { name: "unit" });
  private segmentSec = el("input", {
    name: "segmentSec",
    type: "number",
    step: "any",
    min: "0",
    placeholder: "segment sec",
  });
  private tau = el("input", {
    name: "tau",
    type: "number",
    step: "any",
    placeholder: "tau",
  });
  private order = el("select", { name: "order" });
  private fieldError = el("p", { class: "field-error" });
  private results = el("div", { class: "results" });

  attach(host: HTMLElement): void {
    if (!this.root.hasChildNodes()) this.mount();
    super.attach(host);
  }

  private mount(): void {
    this.mode.append(option("", "mode (default)", true));
    for (const m of FILTER_MODES) this.mode.append(option(m, m, false));
    this.unit.append(option("", "unit (default)", true));
    for (const u of FILTER_UNITS) this.unit.append(option(u, u, false));
    this.order.append(option("", "order (default)", true));
    for (const o of FILTER_ORDERS) this.order.append(option(o, o, false));

    this.form.append(
      this.yearFrom,
      this.yearTo,
      this.concepts,
      this.mode,
      this.unit,
      this.segmentSec,
      this.tau,
      this.order,
      el("button", { type: "submit" }, ["apply"]),
    );
    this.fieldError.hidden = true;
    this.form.addEventListener("submit", (ev) => {
      ev.preventDefault();
      this.apply();
    });
    this.root.append(this.form, this.fieldError, this.results);
  }

  protected override resultsHost(): HTMLElement {
    return this.results;
  }

  private apply(): void {
    const params = this.collect();
    const problem = validate(params);
    if (problem) {
      this.fieldError.textContent = problem;
      this.fieldError.hidden = false;
      return;
    }
    this.fieldError.hidden = true;
    this.router.go({ view: "filter", params });
  }

  private collect(): FilterParams {
    const take = (v: string): string | undefined => (v.trim() === "" ? undefined : v.trim());
    return {
      yearFrom: take(this.yearFrom.value),
      yearTo: take(this.yearTo.value),
      concepts: take(this.concepts.value),
      mode: take(this.mode.value),
      unit: take(this.unit.value),
      segmentSec: take(this.segmentSec.value),
      tau: take(this.tau.value),
      order: take(this.order.value),
    };
  }

  protected async render(state: FilterViewState, signal: AbortSignal): Promise<void> {
    this.syncControls(state.params);
    const body = await this.api.filter(state.params, signal);
    if (signal.aborted) return;

    clear(this.results);
    if (!body.results.length) {
      this.results.append(el("p", { class: "empty" }, ["no videos match these criteria"]));
      return;
    }
    const list = el("ol", { class: "cards" });
    for (const row of body.results) {
      list.append(isSegmentRow(row) ? this.segmentCard(row) : this.videoCard(row));
    }
    this.results.append(list);
  }

  private syncControls(params: FilterParams): void {
    this.yearFrom.value = params.yearFrom ?? "";
    this.yearTo.value = params.yearTo ?? "";
    this.concepts.value = params.concepts ?? "";
    this.mode.value = params.mode ?? "";
    this.unit.value = params.unit ?? "";
    this.segmentSec.value = params.segmentSec ?? "";
    this.tau.value = params.tau ?? "";
    this.order.value = params.order ?? "";
    this.fieldError.hidden = true;
  }

  private videoCard(row: Extract<FilterRow, { year: number }>): HTMLElement {
    const open = el("button", { type: "button", class: "context-action" }, ["open"]);
    open.addEventListener("click", () => {
      this.router.go({ view: "itemDetail", item: `v:${row.videoId}/s:0` });
    });
    return el("li", { class: "card video-card", "data-video": row.videoId }, [
      el("h3", {}, [row.videoId]),
      el("span", { class: "badge" }, [String(row.year)]),
      el("span", { class: "badge value" }, [`value ${row.value}`]),
      el("span", { class: "when" }, [row.creationTime]),
      open,
    ]);
  }

  private segmentCard(row: Extract<FilterRow, { segIndex: number }>): HTMLElement {
    return el("li", { class: "card segment-card", "data-video": row.videoId }, [
      el("h3", {}, [`${row.videoId} segment ${row.segIndex}`]),
      el("span", { class: "badge" }, [`${row.startSec}s to ${row.endSec}s`]),
      el("span", { class: "badge value" }, [`value ${row.value}`]),
    ]);
  }
}

export function validate(params: FilterParams): string | null {
  if (params.yearFrom !== undefined && params.yearTo !== undefined) {
    if (Number(params.yearFrom) > Number(params.yearTo)) {
      return "year range is inverted: 'from' must not exceed 'to'";
    }
  }
  if (params.tau !== undefined) {
    const tau = Number(params.tau);
    if (Number.isNaN(tau) || tau < 0 || tau > 1) {
      return "tau must be between 0 and 1";
    }
  }
  if (params.segmentSec !== undefined && Number(params.segmentSec) <= 0) {
    return "segment length must be positive";
  }
  return null;
}
