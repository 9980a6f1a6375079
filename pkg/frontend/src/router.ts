/**
 * Hash routing: ViewState <-> location.hash.
 *
 * Grammar:
 *   #/search?q=car&threshold=0.5[&kind=metadata]
 *   #/similar/v:v1/s:0?measure=color&k=3
 *   #/featuremaps?concept=car
 *   #/featuremaps/car/netA?organization=video&measure=color&topN=2
 *   #/filter?yearFrom=2008&yearTo=2012&concepts=a,b&...
 *   #/item/v:v2/s:0
 *
 * parseHash(formatHash(state)) reproduces the state exactly, which is what
 * makes every view deep-linkable: reloading a URL re-issues the same API
 * requests because requests are derived from parsed state alone.
 */
import type {
  FeaturemapsState,
  FilterParams,
  FilterViewState,
  ItemDetailState,
  SearchViewState,
  ViewState,
} from "./types.js";

const FILTER_KEYS: ReadonlyArray<keyof FilterParams> = [
  "yearFrom",
  "yearTo",
  "concepts",
  "mode",
  "unit",
  "segmentSec",
  "tau",
  "order",
];

export const DEFAULT_STATE: ViewState = { view: "search", mode: "concepts", q: "" };

// Query-string codec. encodeURIComponent would escape "," ":" "/" which are
// legal in fragment queries and far more readable left alone.
const unescapeReadable = (s: string): string =>
  s.replace(/%2C/gi, ",").replace(/%3A/gi, ":").replace(/%2F/gi, "/");

export function encodeValue(value: string): string {
  return unescapeReadable(encodeURIComponent(value));
}

export function buildQuery(pairs: Array<[string, string | undefined]>): string {
  const parts: string[] = [];
  for (const [key, value] of pairs) {
    if (value === undefined || value === "") continue;
    parts.push(`${key}=${encodeValue(value)}`);
  }
  return parts.length ? `?${parts.join("&")}` : "";
}

function splitHash(hash: string): { path: string; params: URLSearchParams } {
  let body = hash.startsWith("#") ? hash.slice(1) : hash;
  if (!body.startsWith("/")) body = `/${body}`;
  const q = body.indexOf("?");
  const path = q < 0 ? body : body.slice(0, q);
  const params = new URLSearchParams(q < 0 ? "" : body.slice(q + 1));
  return { path, params };
}

const pick = (params: URLSearchParams, key: string): string | undefined => {
  const v = params.get(key);
  return v === null || v === "" ? undefined : v;
};

export function parseHash(hash: string): ViewState {
  const { path, params } = splitHash(hash || "#/search");

  if (path === "/search") {
    if (params.get("kind") === "metadata") {
      return { view: "search", mode: "metadata", q: params.get("q") ?? "", k: pick(params, "k") };
    }
    return {
      view: "search",
      mode: "concepts",
      q: params.get("q") ?? "",
      source: pick(params, "source"),
      threshold: pick(params, "threshold"),
      granularity: pick(params, "granularity"),
      k: pick(params, "k"),
    };
  }

  if (path.startsWith("/similar/")) {
    return {
      view: "search",
      mode: "similar",
      item: path.slice("/similar/".length),
      measure: pick(params, "measure"),
      granularity: pick(params, "granularity"),
      k: pick(params, "k"),
    };
  }

  if (path === "/featuremaps") {
    return { view: "featuremaps", concept: pick(params, "concept") };
  }

  const mapMatch = /^\/featuremaps\/([^/]+)\/([^/]+)$/.exec(path);
  if (mapMatch) {
    return {
      view: "featuremaps",
      concept: decodeURIComponent(mapMatch[1]!),
      map: {
        concept: decodeURIComponent(mapMatch[1]!),
        source: decodeURIComponent(mapMatch[2]!),
        organization: pick(params, "organization"),
        measure: pick(params, "measure"),
        topN: pick(params, "topN"),
      },
    };
  }

  if (path === "/filter") {
    const out: FilterParams = {};
    for (const key of FILTER_KEYS) {
      const v = pick(params, key);
      if (v !== undefined) out[key] = v;
    }
    return { view: "filter", params: out };
  }

  if (path.startsWith("/item/")) {
    return { view: "itemDetail", item: path.slice("/item/".length) };
  }

  return DEFAULT_STATE;
}

function formatSearch(state: SearchViewState): string {
  if (state.mode === "similar") {
    const qs = buildQuery([
      ["measure", state.measure],
      ["granularity", state.granularity],
      ["k", state.k],
    ]);
    return `#/similar/${state.item}${qs}`;
  }
  if (state.mode === "metadata") {
    return `#/search${buildQuery([
      ["q", state.q],
      ["k", state.k],
      ["kind", "metadata"],
    ])}`;
  }
  return `#/search${buildQuery([
    ["q", state.q],
    ["source", state.source],
    ["threshold", state.threshold],
    ["granularity", state.granularity],
    ["k", state.k],
  ])}`;
}

function formatFeaturemaps(state: FeaturemapsState): string {
  if (state.map) {
    const m = state.map;
    const qs = buildQuery([
      ["organization", m.organization],
      ["measure", m.measure],
      ["topN", m.topN],
    ]);
    return `#/featuremaps/${encodeURIComponent(m.concept)}/${encodeURIComponent(m.source)}${qs}`;
  }
  return `#/featuremaps${buildQuery([["concept", state.concept]])}`;
}

function formatFilter(state: FilterViewState): string {
  return `#/filter${buildQuery(FILTER_KEYS.map((k) => [k, state.params[k]]))}`;
}

function formatItem(state: ItemDetailState): string {
  return `#/item/${state.item}`;
}

export function formatHash(state: ViewState): string {
  switch (state.view) {
    case "search":
      return formatSearch(state);
    case "featuremaps":
      return formatFeaturemaps(state);
    case "filter":
      return formatFilter(state);
    case "itemDetail":
      return formatItem(state);
  }
}

/** Navigation handle views use to move between states. */
export interface Router {
  go(state: ViewState): void;
}
