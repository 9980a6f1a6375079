/**
 * Result tiles shared by the search grid, map cells, and the detail strip.
 *
 * Tiles are appended strictly in response order; nothing here sorts or
 * rescores. Thumbnails load asynchronously onto a canvas and fall back to
 * a labeled placeholder when the frame or a 2d context is unavailable.
 */
import type { ApiClient } from "../api.js";
import { isAbort } from "../api.js";
import { el } from "../dom.js";
import { paintImage } from "../ppm.js";
import type { Router } from "../router.js";
import { MEASURES, type Hit } from "../types.js";

export async function loadThumb(
  canvas: HTMLCanvasElement,
  api: ApiClient,
  videoId: string,
  frameIndex: number,
  signal: AbortSignal,
): Promise<void> {
  try {
    const image = await api.thumb(videoId, frameIndex, signal);
    if (signal.aborted) return;
    if (image && paintImage(canvas, image)) {
      canvas.classList.remove("thumb-pending");
    } else {
      canvas.classList.replace("thumb-pending", "thumb-missing");
    }
  } catch (err) {
    if (!isAbort(err)) canvas.classList.replace("thumb-pending", "thumb-missing");
  }
}

export function scoreBadge(score: number): HTMLElement {
  // displayed verbatim, the server already rounds
  return el("span", { class: "badge score" }, [String(score)]);
}

function contextLabel(hit: Hit): string {
  if (hit.kind === "shot") return `shot ${hit.ordinal} (${hit.startFrame}..${hit.endFrame})`;
  return `frame @ ${hit.tSec}s`;
}

/** Full search-result tile: thumb, caption, similar actions, video context. */
export function hitTile(
  hit: Hit,
  api: ApiClient,
  router: Router,
  signal: AbortSignal,
  thumbJobs: Array<Promise<void>>,
): HTMLElement {
  const canvas = el("canvas", { class: "thumb thumb-pending", width: "32", height: "24" });
  thumbJobs.push(loadThumb(canvas, api, hit.videoId, hit.thumbFrame, signal));

  const actions = el("div", { class: "tile-actions" });
  for (const measure of MEASURES) {
    const btn = el(
      "button",
      { type: "button", class: "similar-action", "data-measure": measure },
      [measure],
    );
    btn.addEventListener("click", () => {
      router.go({
        view: "search",
        mode: "similar",
        item: hit.item,
        measure: measure === "concept" ? undefined : measure,
      });
    });
    actions.append(btn);
  }
  const context = el("button", { type: "button", class: "context-action" }, ["video"]);
  context.addEventListener("click", () => {
    router.go({ view: "itemDetail", item: hit.item });
  });
  actions.append(context);

  const tile = el("figure", { class: "tile", "data-item": hit.item }, [
    canvas,
    el("figcaption", {}, [
      el("span", { class: "item-key" }, [hit.item]),
      scoreBadge(hit.score),
      el("span", { class: "item-context" }, [contextLabel(hit)]),
    ]),
    el("div", { class: "similar-label" }, ["similar by:"]),
    actions,
  ]);
  return tile;
}
