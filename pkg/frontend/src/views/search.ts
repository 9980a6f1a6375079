/**
 * Search view: concept or metadata queries, plus "similar to item" results.
 *
 * The grid renders hits in server rank order. An unknown concept is a
 * distinct notice, not an empty result list: the service answers 404
 * no_such_concept and the view surfaces which tokens were unknown.
 */
import { ApiError } from "../api.js";
import { clear, el, option } from "../dom.js";
import type { Hit, MetadataHit, SearchViewState, SimilarSearchState } from "../types.js";
import { MEASURES, parseItemKey } from "../types.js";
import { View } from "./base.js";
import { hitTile } from "./tiles.js";

export class SearchView extends View<SearchViewState> {
  private form = el("form", { class: "query-bar" });
  private qInput = el("input", { name: "q", placeholder: "concepts, e.g. car or person,apple" });
  private kindSelect = el("select", { name: "kind" });
  private thresholdInput = el("input", {
    name: "threshold",
    type: "number",
    step: "any",
    min: "0",
    placeholder: "threshold",
  });
  private banner = el("div", { class: "similar-banner" });
  private results = el("div", { class: "results" });

  attach(host: HTMLElement): void {
    if (!this.root.hasChildNodes()) this.mount();
    super.attach(host);
  }

  private mount(): void {
    this.kindSelect.append(option("concepts", "concepts", true), option("metadata", "metadata", false));
    this.form.append(
      this.qInput,
      this.kindSelect,
      this.thresholdInput,
      el("button", { type: "submit" }, ["search"]),
    );
    this.form.addEventListener("submit", (ev) => {
      ev.preventDefault();
      const q = this.qInput.value.trim();
      if (!q) return;
      if (this.kindSelect.value === "metadata") {
        this.router.go({ view: "search", mode: "metadata", q });
      } else {
        const threshold = this.thresholdInput.value.trim();
        this.router.go({
          view: "search",
          mode: "concepts",
          q,
          threshold: threshold === "" ? undefined : threshold,
        });
      }
    });
    this.banner.hidden = true;
    this.root.append(this.form, this.banner, this.results);
  }

  protected override resultsHost(): HTMLElement {
    return this.results;
  }

  protected async render(state: SearchViewState, signal: AbortSignal): Promise<void> {
    this.syncControls(state);

    if (state.mode === "similar") {
      const body = await this.api.similar(state, signal);
      if (signal.aborted) return;
      this.renderGrid(body.hits, signal);
      return;
    }

    if (!state.q.trim()) {
      clear(this.results);
      this.results.append(el("p", { class: "hint" }, ["type a query to explore the catalog"]));
      return;
    }

    if (state.mode === "metadata") {
      const body = await this.api.searchMetadata(state, signal);
      if (signal.aborted) return;
      this.renderMetadata(body.hits);
      return;
    }

    try {
      const body = await this.api.searchConcepts(state, signal);
      if (signal.aborted) return;
      this.renderGrid(body.hits, signal);
    } catch (err) {
      if (err instanceof ApiError && err.code === "no_such_concept") {
        this.renderUnknownConcept(err);
        return;
      }
      throw err;
    }
  }

  private syncControls(state: SearchViewState): void {
    if (state.mode === "similar") {
      this.qInput.value = "";
      this.thresholdInput.value = "";
      this.renderBanner(state);
      return;
    }
    this.banner.hidden = true;
    this.qInput.value = state.q;
    this.kindSelect.value = state.mode;
    this.thresholdInput.value = state.mode === "concepts" ? (state.threshold ?? "") : "";
  }

  /* similar mode keeps its anchor item and measure switchable in place */
  private renderBanner(state: SimilarSearchState): void {
    clear(this.banner);
    this.banner.hidden = false;
    const measureSelect = el("select", { name: "measure" });
    for (const m of MEASURES) {
      measureSelect.append(option(m, m, (state.measure ?? "concept") === m));
    }
    measureSelect.addEventListener("change", () => {
      const m = measureSelect.value;
      this.router.go({ ...state, measure: m === "concept" ? undefined : m });
    });
    const context = el("button", { type: "button", class: "context-action" }, ["video context"]);
    context.addEventListener("click", () => {
      this.router.go({ view: "itemDetail", item: state.item });
    });
    this.banner.append(
      el("span", {}, ["similar to "]),
      el("strong", { class: "item-key" }, [state.item]),
      el("span", {}, [" by "]),
      measureSelect,
      context,
    );
  }

  private renderGrid(hits: Hit[], signal: AbortSignal): void {
    clear(this.results);
    if (!hits.length) {
      this.results.append(el("p", { class: "empty" }, ["no results"]));
      return;
    }
    const grid = el("ol", { class: "grid" });
    const thumbJobs: Array<Promise<void>> = [];
    for (const hit of hits) {
      grid.append(el("li", {}, [hitTile(hit, this.api, this.router, signal, thumbJobs)]));
    }
    this.results.append(grid);
    void Promise.allSettled(thumbJobs);
  }

  private renderMetadata(hits: MetadataHit[]): void {
    clear(this.results);
    if (!hits.length) {
      this.results.append(el("p", { class: "empty" }, ["no results"]));
      return;
    }
    const list = el("ol", { class: "cards" });
    for (const hit of hits) {
      const open = el("button", { type: "button", class: "context-action" }, ["open"]);
      open.addEventListener("click", () => {
        this.router.go({ view: "itemDetail", item: `v:${hit.videoId}/s:0` });
      });
      list.append(
        el("li", { class: "card video-card", "data-video": hit.videoId }, [
          el("h3", {}, [hit.title]),
          el("p", {}, [hit.description]),
          el("span", { class: "badge" }, [hit.creationTime]),
          open,
        ]),
      );
    }
    this.results.append(list);
  }

  private renderUnknownConcept(err: ApiError): void {
    clear(this.results);
    const tokens =
      err.detail && typeof err.detail === "object" && "tokens" in err.detail
        ? (err.detail as { tokens: string[] }).tokens.join(", ")
        : "";
    this.results.append(
      el("div", { class: "notice notice-unknown-concept" }, [
        el("strong", {}, ["unknown concept"]),
        el("span", {}, [tokens ? `: ${tokens}` : ""]),
        el("p", {}, ["no detector vocabulary contains this term, so there is nothing to rank"]),
      ]),
    );
  }
}

export function describeItem(item: string): string {
  const ref = parseItemKey(item);
  if (!ref) return item;
  return `${ref.kind} ${ref.ordinal} of ${ref.videoId}`;
}
