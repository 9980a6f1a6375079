/**
 * Item detail: one shot or frame in its video context. Shows the keyframe,
 * the video's metadata, a strip of neighboring shots for orientation, and
 * similar-search actions for every measure.
 */
import { clear, el } from "../dom.js";
import type { ItemDetailState, ShotRow, VideoDetail } from "../types.js";
import { MEASURES, parseItemKey } from "../types.js";
import { View } from "./base.js";
import { loadThumb } from "./tiles.js";

export class ItemDetailView extends View<ItemDetailState> {
  protected async render(state: ItemDetailState, signal: AbortSignal): Promise<void> {
    const ref = parseItemKey(state.item);
    clear(this.root);
    if (!ref) {
      this.root.append(
        el("div", { class: "notice notice-error" }, [`not an item key: ${state.item}`]),
      );
      return;
    }

    const video = await this.api.videoDetail(ref.videoId, signal);
    if (signal.aborted) return;

    const thumbJobs: Array<Promise<void>> = [];
    const keyframe =
      ref.kind === "shot"
        ? (video.shots[ref.ordinal]?.keyframe ?? 0)
        : (video.samples[ref.ordinal]?.frameIndex ?? ref.ordinal);

    const hero = el("canvas", { class: "thumb hero thumb-pending", width: "32", height: "24" });
    thumbJobs.push(loadThumb(hero, this.api, ref.videoId, keyframe, signal));

    const actions = el("div", { class: "tile-actions" });
    for (const measure of MEASURES) {
      const btn = el(
        "button",
        { type: "button", class: "similar-action", "data-measure": measure },
        [`similar by ${measure}`],
      );
      btn.addEventListener("click", () => {
        this.router.go({
          view: "search",
          mode: "similar",
          item: state.item,
          measure: measure === "concept" ? undefined : measure,
        });
      });
      actions.append(btn);
    }

    const strip = el("div", { class: "shot-strip" });
    for (const shot of video.shots) {
      strip.append(this.stripEntry(video, shot, ref.kind === "shot" ? ref.ordinal : -1, thumbJobs, signal));
    }

    this.root.append(
      el("header", { class: "item-head" }, [
        el("h2", {}, [`${video.title} `, el("span", { class: "item-key" }, [state.item])]),
        el("p", {}, [video.description]),
        el("span", { class: "badge" }, [video.creationTime]),
        el("span", { class: "badge" }, [`${video.fps} fps`]),
        el("span", { class: "badge" }, [`${video.durationSec}s`]),
      ]),
      hero,
      actions,
      el("h3", {}, ["shots in this video"]),
      strip,
    );
    void Promise.allSettled(thumbJobs);
  }

  private stripEntry(
    video: VideoDetail,
    shot: ShotRow,
    currentOrdinal: number,
    thumbJobs: Array<Promise<void>>,
    signal: AbortSignal,
  ): HTMLElement {
    const canvas = el("canvas", { class: "thumb thumb-pending", width: "32", height: "24" });
    thumbJobs.push(loadThumb(canvas, this.api, video.videoId, shot.keyframe, signal));
    const classes = shot.shotIndex === currentOrdinal ? "strip-shot current" : "strip-shot";
    const node = el("button", { type: "button", class: classes, "data-shot": String(shot.shotIndex) }, [
      canvas,
      el("span", {}, [`shot ${shot.shotIndex}`]),
      el("span", { class: "badge" }, [`${shot.startFrame}..${shot.endFrame}`]),
    ]);
    node.addEventListener("click", () => {
      this.router.go({ view: "itemDetail", item: `v:${video.videoId}/s:${shot.shotIndex}` });
    });
    return node;
  }
}
