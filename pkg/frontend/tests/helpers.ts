/** Shared boot/teardown for view tests running against the mock API. */
import { App, startApp } from "../src/app.js";

let active: App | null = null;

export async function boot(hash: string): Promise<App> {
  active?.stop();
  document.body.innerHTML = "";
  const root = document.createElement("div");
  document.body.append(root);
  window.location.hash = hash;
  active = startApp(root, { baseUrl: "http://api.test" });
  await active.settle();
  return active;
}

export function shutdown(): void {
  active?.stop();
  active = null;
}

export const itemsInDom = (selector: string): string[] =>
  [...document.querySelectorAll<HTMLElement>(selector)].map(
    (node) => node.dataset["item"] ?? "",
  );

export async function click(target: Element, app: App): Promise<void> {
  (target as HTMLElement).dispatchEvent(new MouseEvent("click", { bubbles: true }));
  await app.settle();
}

export async function choose(select: HTMLSelectElement, value: string, app: App): Promise<void> {
  select.value = value;
  select.dispatchEvent(new Event("change", { bubbles: true }));
  await app.settle();
}
