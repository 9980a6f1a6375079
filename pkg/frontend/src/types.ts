/**
 * Wire types for the video exploration API plus the client-side view state.
 *
 * Response interfaces mirror the server's JSON field-for-field. View state
 * is kept as strings exactly as they appear in the URL: the URL is the
 * single source of truth, values are passed through to the API untouched,
 * and the client never recomputes or reformats a score.
 */

// === API responses ===

export interface VideoSummary {
  videoId: string;
  fps: number;
  durationSec: number;
  creationTime: string;
  title: string;
  description: string;
  frameCount: number;
  shotCount: number;
  sampleCount: number;
}

export interface ShotRow {
  shotIndex: number;
  startFrame: number;
  endFrame: number;
  keyframe: number;
}

export interface SampleRow {
  tSec: number;
  frameIndex: number;
}

export interface VideoDetail extends VideoSummary {
  shots: ShotRow[];
  samples: SampleRow[];
}

export interface Hit {
  item: string;
  videoId: string;
  kind: "shot" | "frame";
  ordinal: number;
  score: number;
  thumbFrame: number;
  startFrame?: number;
  endFrame?: number;
  tSec?: number;
}

export interface ConceptSearchBody {
  query: {
    tokens: string[];
    source: string | null;
    threshold: number;
    granularity: string;
    k: number;
  };
  hits: Hit[];
}

export interface MetadataHit {
  videoId: string;
  title: string;
  description: string;
  creationTime: string;
}

export interface MetadataSearchBody {
  query: { text: string; k: number };
  hits: MetadataHit[];
}

export interface SimilarBody {
  query: {
    item: string;
    measure: string;
    granularity: string;
    k: number;
    restricted: boolean;
  };
  hits: Hit[];
}

export interface MapCard {
  concept: string;
  source: string;
  itemCount: number;
  gridShape: [number, number];
}

export interface MapsOverviewBody {
  concept: string;
  maps: MapCard[];
}

export interface MapCell {
  cell: number;
  item: string;
  videoId: string;
  thumbFrame: number;
  score: number;
}

export interface MapDetailBody {
  concept: string;
  source: string;
  organization: string;
  measure: string;
  topN: number;
  itemCount: number;
  width: number;
  height: number;
  cells: MapCell[];
}

export interface FilterVideoRow {
  videoId: string;
  creationTime: string;
  year: number;
  value: number;
}

export interface FilterSegmentRow {
  videoId: string;
  segIndex: number;
  startSec: number;
  endSec: number;
  value: number;
}

export type FilterRow = FilterVideoRow | FilterSegmentRow;

export interface FilterBody {
  criteria: Record<string, unknown>;
  results: FilterRow[];
}

export interface ErrorBody {
  httpStatus: number;
  code: string;
  message: string;
  detail?: unknown;
}

export const MEASURES = ["concept", "color", "texture", "motion"] as const;
export const ORGANIZATIONS = ["som", "confidence", "video"] as const;
export const FILTER_MODES = ["frequency", "confidence"] as const;
export const FILTER_UNITS = ["video", "segment"] as const;
export const FILTER_ORDERS = ["period", "value"] as const;

// === Item keys ===

export interface ItemRef {
  videoId: string;
  kind: "shot" | "frame";
  ordinal: number;
}

const ITEM_KEY = /^v:(.+)\/(s|f):(\d+)$/;

export function parseItemKey(key: string): ItemRef | null {
  const m = ITEM_KEY.exec(key);
  if (!m) return null;
  return {
    videoId: m[1]!,
    kind: m[2] === "s" ? "shot" : "frame",
    ordinal: Number(m[3]),
  };
}

// === View state ===
// One state object per view; every field round-trips through the URL hash.

export interface ConceptSearchState {
  view: "search";
  mode: "concepts";
  q: string;
  source?: string;
  threshold?: string;
  granularity?: string;
  k?: string;
}

export interface MetadataSearchState {
  view: "search";
  mode: "metadata";
  q: string;
  k?: string;
}

export interface SimilarSearchState {
  view: "search";
  mode: "similar";
  item: string;
  measure?: string;
  granularity?: string;
  k?: string;
}

export type SearchViewState =
  | ConceptSearchState
  | MetadataSearchState
  | SimilarSearchState;

export interface MapSelection {
  concept: string;
  source: string;
  organization?: string;
  measure?: string;
  topN?: string;
}

export interface FeaturemapsState {
  view: "featuremaps";
  concept?: string;
  map?: MapSelection;
}

export interface FilterParams {
  yearFrom?: string;
  yearTo?: string;
  concepts?: string;
  mode?: string;
  unit?: string;
  segmentSec?: string;
  tau?: string;
  order?: string;
}

export interface FilterViewState {
  view: "filter";
  params: FilterParams;
}

export interface ItemDetailState {
  view: "itemDetail";
  item: string;
}

export type ViewState =
  | SearchViewState
  | FeaturemapsState
  | FilterViewState
  | ItemDetailState;

export type ActiveView = ViewState["view"];
