/**
 * Featuremap view: a multi-map overview (one card per detector source that
 * knows the concept) and a fullscreen single-map mode with organization,
 * measure, and size selectors that re-request without leaving the view.
 */
import { clear, el, option } from "../dom.js";
import type { FeaturemapsState, MapDetailBody, MapSelection, MapsOverviewBody } from "../types.js";
import { MEASURES, ORGANIZATIONS } from "../types.js";
import { View } from "./base.js";
import { loadThumb, scoreBadge } from "./tiles.js";

export class FeaturemapsView extends View<FeaturemapsState> {
  private form = el("form", { class: "query-bar" });
  private conceptInput = el("input", { name: "concept", placeholder: "concept, e.g. car" });
  private results = el("div", { class: "results" });

  attach(host: HTMLElement): void {
    if (!this.root.hasChildNodes()) this.mount();
    super.attach(host);
  }

  private mount(): void {
    this.form.append(this.conceptInput, el("button", { type: "submit" }, ["show maps"]));
    this.form.addEventListener("submit", (ev) => {
      ev.preventDefault();
      const concept = this.conceptInput.value.trim();
      if (concept) this.router.go({ view: "featuremaps", concept });
    });
    this.root.append(this.form, this.results);
  }

  protected override resultsHost(): HTMLElement {
    return this.results;
  }

  protected async render(state: FeaturemapsState, signal: AbortSignal): Promise<void> {
    this.conceptInput.value = state.concept ?? "";

    if (state.map) {
      const body = await this.api.mapDetail(state.map, signal);
      if (signal.aborted) return;
      this.renderFullscreen(state.map, body, signal);
      return;
    }

    if (!state.concept) {
      clear(this.results);
      this.results.append(el("p", { class: "hint" }, ["pick a concept to see its maps"]));
      return;
    }

    const body = await this.api.mapsOverview(state.concept, signal);
    if (signal.aborted) return;
    this.renderOverview(body);
  }

  private renderOverview(body: MapsOverviewBody): void {
    clear(this.results);
    if (!body.maps.length) {
      this.results.append(
        el("div", { class: "notice notice-no-source" }, [
          el("strong", {}, [body.concept]),
          el("span", {}, [": none of the detector sources knows this concept"]),
        ]),
      );
      return;
    }
    const cards = el("div", { class: "map-cards" });
    for (const card of body.maps) {
      const node = el("button", { type: "button", class: "map-card", "data-source": card.source }, [
        el("h3", {}, [card.source]),
        el("span", { class: "badge" }, [`${card.itemCount} items`]),
        el("span", { class: "badge" }, [`${card.gridShape[0]}x${card.gridShape[1]}`]),
      ]);
      node.addEventListener("click", () => {
        this.router.go({
          view: "featuremaps",
          concept: body.concept,
          map: { concept: body.concept, source: card.source },
        });
      });
      cards.append(node);
    }
    this.results.append(cards);
  }

  private renderFullscreen(sel: MapSelection, body: MapDetailBody, signal: AbortSignal): void {
    clear(this.results);

    const back = el("button", { type: "button", class: "back-action" }, ["all maps"]);
    back.addEventListener("click", () => {
      this.router.go({ view: "featuremaps", concept: sel.concept });
    });

    const organizationSelect = el("select", { name: "organization" });
    for (const org of ORGANIZATIONS) {
      organizationSelect.append(option(org, org, body.organization === org));
    }
    organizationSelect.addEventListener("change", () => {
      const org = organizationSelect.value;
      this.goMap({ ...sel, organization: org === "som" ? undefined : org });
    });

    const measureSelect = el("select", { name: "measure" });
    for (const m of MEASURES) {
      measureSelect.append(option(m, m, body.measure === m));
    }
    measureSelect.addEventListener("change", () => {
      const m = measureSelect.value;
      this.goMap({ ...sel, measure: m === "concept" ? undefined : m });
    });

    const head = el("div", { class: "map-head" }, [
      back,
      el("h2", {}, [`${body.concept} / ${body.source}`]),
      el("span", { class: "badge" }, [`${body.itemCount} items`]),
      el("label", {}, ["organization ", organizationSelect]),
      el("label", {}, ["measure ", measureSelect]),
    ]);

    const grid = el("div", { class: "map-grid" });
    grid.style.gridTemplateColumns = `repeat(${body.width}, minmax(64px, 1fr))`;
    const thumbJobs: Array<Promise<void>> = [];
    for (const cell of body.cells) {
      const canvas = el("canvas", { class: "thumb thumb-pending", width: "32", height: "24" });
      thumbJobs.push(loadThumb(canvas, this.api, cell.videoId, cell.thumbFrame, signal));
      const node = el("button", { type: "button", class: "cell", "data-item": cell.item }, [
        canvas,
        el("span", { class: "item-key" }, [cell.item]),
        scoreBadge(cell.score),
      ]);
      node.style.gridColumnStart = String((cell.cell % body.width) + 1);
      node.style.gridRowStart = String(Math.floor(cell.cell / body.width) + 1);
      node.addEventListener("click", () => {
        this.router.go({ view: "itemDetail", item: cell.item });
      });
      grid.append(node);
    }

    this.results.append(head, grid);
    void Promise.allSettled(thumbJobs);
  }

  private goMap(map: MapSelection): void {
    this.router.go({ view: "featuremaps", concept: map.concept, map });
  }
}
