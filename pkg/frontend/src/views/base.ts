/**
 * View lifecycle shared by all screens.
 *
 * A view owns one root section while attached. update(state) re-renders
 * from parsed URL state; each call aborts the previous one's requests, so
 * at most one request chain per view is in flight and stale responses can
 * never overwrite newer state.
 */
import { ApiClient, ApiError, isAbort } from "../api.js";
import { clear, el } from "../dom.js";
import type { Router } from "../router.js";
import type { ViewState } from "../types.js";

export abstract class View<S extends ViewState = ViewState> {
  protected root: HTMLElement;
  private controller: AbortController | null = null;
  private lastState: S | null = null;

  constructor(
    protected api: ApiClient,
    protected router: Router,
    rootClass: string,
  ) {
    this.root = el("section", { class: `view ${rootClass}` });
  }

  attach(host: HTMLElement): void {
    host.append(this.root);
  }

  detach(): void {
    this.controller?.abort();
    this.controller = null;
    this.root.remove();
  }

  async update(state: S): Promise<void> {
    this.lastState = state;
    this.controller?.abort();
    this.controller = new AbortController();
    const signal = this.controller.signal;
    try {
      await this.render(state, signal);
    } catch (err) {
      if (isAbort(err) || signal.aborted) return;
      this.renderError(err);
    }
  }

  protected abstract render(state: S, signal: AbortSignal): Promise<void>;

  /** Error banner with a retry control, replacing the results area. */
  protected renderError(err: unknown): void {
    const target = this.resultsHost();
    clear(target);
    const message = err instanceof Error ? err.message : String(err);
    const code = err instanceof ApiError ? err.code : "request_failed";
    const retry = el("button", { type: "button", class: "retry" }, ["retry"]);
    retry.addEventListener("click", () => {
      if (this.lastState) void this.update(this.lastState);
    });
    target.append(
      el("div", { class: "notice notice-error", "data-code": code }, [
        el("span", {}, [message]),
        retry,
      ]),
    );
  }

  /** Where notices and errors land; defaults to the view root. */
  protected resultsHost(): HTMLElement {
    return this.root;
  }
}
