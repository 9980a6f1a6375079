/**
 * Application shell: owns the router wiring and the four views.
 *
 * location.hash is the only state store. Controls navigate by writing a
 * new hash; rendering always starts from the parsed hash, so any URL can
 * be reloaded or shared and reproduces the same API requests. Back and
 * forward navigation arrive as hashchange events and replay the same path.
 */
import { ApiClient } from "./api.js";
import { el } from "./dom.js";
import { formatHash, parseHash, type Router } from "./router.js";
import type { ActiveView, ViewState } from "./types.js";
import { View } from "./views/base.js";
import { FeaturemapsView } from "./views/featuremaps.js";
import { FilterView } from "./views/filter.js";
import { ItemDetailView } from "./views/item.js";
import { SearchView } from "./views/search.js";

export interface AppOptions {
  baseUrl?: string;
}

const NAV_ITEMS: Array<[ActiveView, string, string]> = [
  ["search", "#/search", "search"],
  ["featuremaps", "#/featuremaps", "feature maps"],
  ["filter", "#/filter", "filter"],
];

export class App implements Router {
  private views: Record<ActiveView, View>;
  private current: View | null = null;
  private host: HTMLElement;
  private navLinks = new Map<ActiveView, HTMLAnchorElement>();
  private lastHash: string | null = null;
  private pending: Promise<void> = Promise.resolve();
  private generation = 0;
  private readonly onHashChange = (): void => this.handleHash();

  constructor(
    private root: HTMLElement,
    options: AppOptions = {},
  ) {
    const api = new ApiClient(options.baseUrl ?? "");
    this.views = {
      search: new SearchView(api, this, "search-view"),
      featuremaps: new FeaturemapsView(api, this, "featuremaps-view"),
      filter: new FilterView(api, this, "filter-view"),
      itemDetail: new ItemDetailView(api, this, "item-view"),
    };

    const nav = el("nav", { class: "top-nav" });
    for (const [view, href, label] of NAV_ITEMS) {
      const link = el("a", { href }, [label]);
      this.navLinks.set(view, link);
      nav.append(link);
    }
    this.host = el("main", { class: "view-host" });
    root.append(el("header", { class: "masthead" }, [el("h1", {}, ["divex"]), nav]), this.host);

    window.addEventListener("hashchange", this.onHashChange);
    this.handleHash();
  }

  /** Router: write the state into the URL, then render it. */
  go(state: ViewState): void {
    const hash = formatHash(state);
    if (window.location.hash !== hash) {
      window.location.hash = hash;
    }
    // handle immediately; the trailing hashchange event is deduplicated
    this.handleHash();
  }

  private handleHash(): void {
    const hash = window.location.hash || "#/search";
    if (hash === this.lastHash) return;
    this.lastHash = hash;

    const state = parseHash(hash);
    const view = this.views[state.view];
    if (view !== this.current) {
      this.current?.detach();
      view.attach(this.host);
      this.current = view;
    }
    for (const [name, link] of this.navLinks) {
      link.classList.toggle("active", name === state.view);
    }
    this.generation += 1;
    this.pending = view.update(state as never);
  }

  /** Resolve once rendering settles; used by tests and embedders. */
  async settle(): Promise<void> {
    for (let i = 0; i < 50; i += 1) {
      const seen = this.generation;
      await this.pending;
      await new Promise((resolve) => setTimeout(resolve, 0));
      if (this.generation === seen) return;
    }
    throw new Error("render loop did not settle");
  }

  stop(): void {
    window.removeEventListener("hashchange", this.onHashChange);
    this.current?.detach();
    this.current = null;
    this.root.replaceChildren();
  }
}

export function startApp(root: HTMLElement, options: AppOptions = {}): App {
  return new App(root, options);
}
