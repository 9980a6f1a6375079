/**
 * Typed HTTP client for the exploration service.
 *
 * Every request path is derived from parsed view state only, so a given
 * state always produces the identical request. Parameters absent from the
 * state are omitted from the request and left to server defaults. Errors
 * arrive as a flat envelope (httpStatus, code, message, detail) and are
 * rethrown as ApiError.
 */
import { decodePpm, type RgbImage } from "./ppm.js";
import { buildQuery } from "./router.js";
import type {
  ConceptSearchBody,
  ConceptSearchState,
  ErrorBody,
  FilterBody,
  FilterParams,
  MapDetailBody,
  MapSelection,
  MapsOverviewBody,
  MetadataSearchBody,
  MetadataSearchState,
  SimilarBody,
  SimilarSearchState,
  VideoDetail,
} from "./types.js";

export class ApiError extends Error {
  readonly httpStatus: number;
  readonly code: string;
  readonly detail: unknown;

  constructor(body: ErrorBody) {
    super(body.message);
    this.name = "ApiError";
    this.httpStatus = body.httpStatus;
    this.code = body.code;
    this.detail = body.detail;
  }
}

export const isAbort = (err: unknown): boolean =>
  err instanceof DOMException && err.name === "AbortError";

const filterPairs = (p: FilterParams): Array<[string, string | undefined]> => [
  ["yearFrom", p.yearFrom],
  ["yearTo", p.yearTo],
  ["concepts", p.concepts],
  ["mode", p.mode],
  ["unit", p.unit],
  ["segmentSec", p.segmentSec],
  ["tau", p.tau],
  ["order", p.order],
];

export class ApiClient {
  constructor(private baseUrl: string = "") {}

  private async getJson<T>(path: string, signal?: AbortSignal): Promise<T> {
    const res = await fetch(this.baseUrl + path, { signal });
    const body = (await res.json()) as T | ErrorBody;
    if (!res.ok) throw new ApiError(body as ErrorBody);
    return body as T;
  }

  searchConcepts(state: ConceptSearchState, signal?: AbortSignal): Promise<ConceptSearchBody> {
    const qs = buildQuery([
      ["q", state.q],
      ["source", state.source],
      ["threshold", state.threshold],
      ["granularity", state.granularity],
      ["k", state.k],
    ]);
    return this.getJson(`/search/concepts${qs}`, signal);
  }

  searchMetadata(state: MetadataSearchState, signal?: AbortSignal): Promise<MetadataSearchBody> {
    const qs = buildQuery([
      ["q", state.q],
      ["k", state.k],
    ]);
    return this.getJson(`/search/metadata${qs}`, signal);
  }

  similar(state: SimilarSearchState, signal?: AbortSignal): Promise<SimilarBody> {
    const qs = buildQuery([
      ["measure", state.measure],
      ["granularity", state.granularity],
      ["k", state.k],
    ]);
    return this.getJson(`/similar/${state.item}${qs}`, signal);
  }

  mapsOverview(concept: string, signal?: AbortSignal): Promise<MapsOverviewBody> {
    return this.getJson(`/featuremaps${buildQuery([["concept", concept]])}`, signal);
  }

  mapDetail(sel: MapSelection, signal?: AbortSignal): Promise<MapDetailBody> {
    const qs = buildQuery([
      ["organization", sel.organization],
      ["measure", sel.measure],
      ["topN", sel.topN],
    ]);
    const path = `/featuremaps/${encodeURIComponent(sel.concept)}/${encodeURIComponent(sel.source)}`;
    return this.getJson(`${path}${qs}`, signal);
  }

  filter(params: FilterParams, signal?: AbortSignal): Promise<FilterBody> {
    return this.getJson(`/filter${buildQuery(filterPairs(params))}`, signal);
  }

  videoDetail(videoId: string, signal?: AbortSignal): Promise<VideoDetail> {
    return this.getJson(`/videos/${encodeURIComponent(videoId)}`, signal);
  }

  /** Fetch and decode a keyframe thumbnail; null when unavailable. */
  async thumb(videoId: string, frameIndex: number, signal?: AbortSignal): Promise<RgbImage | null> {
    const path = `/thumbs/${encodeURIComponent(videoId)}/${frameIndex}.ppm`;
    const res = await fetch(this.baseUrl + path, { signal });
    if (!res.ok) return null;
    try {
      return decodePpm(new Uint8Array(await res.arrayBuffer()));
    } catch {
      return null;
    }
  }
}
