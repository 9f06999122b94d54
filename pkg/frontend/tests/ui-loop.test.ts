/**
 * Scripted browser loop against the real service: create a session, advance
 * to Generate, edit one element's color through the panel, apply &
 * regenerate, and check the new iteration plus its updated SVG preview.
 */

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { mountApp, type App } from "../src/app.js";
import { startService, type RunningService } from "./service.js";

const INPUT_TEXT =
  "A watermill beside a frozen river turns slowly through winter, storing " +
  "energy in a flywheel that powers the village workshop through the dark months.";

let service: RunningService;
let app: App;
let root: HTMLElement;

beforeAll(async () => {
  service = await startService();
  root = document.createElement("div");
  document.body.appendChild(root);
  app = mountApp(root, service.baseUrl);
}, 60_000);

afterAll(() => {
  service?.stop();
});

async function clickAdvance(): Promise<void> {
  const button = root.querySelector<HTMLButtonElement>("button.advance");
  expect(button).not.toBeNull();
  button!.click();
  await app.settled();
}

describe("human-in-the-loop UI", () => {
  it("creates a session from the form", async () => {
    const textarea = root.querySelector<HTMLTextAreaElement>("textarea[name=input-text]");
    expect(textarea).not.toBeNull();
    textarea!.value = INPUT_TEXT;
    root.querySelector("form.create-session")!
      .dispatchEvent(new window.Event("submit", { bubbles: true, cancelable: true }));
    await app.settled();

    expect(app.session).not.toBeNull();
    expect(app.session!.stage).toBe("Input");
    const stages = [...root.querySelectorAll(".stepper-stages .stage")];
    expect(stages).toHaveLength(6);
    expect(stages[0].classList.contains("active")).toBe(true);
    expect(stages.slice(1).every((s) => s.classList.contains("pending"))).toBe(true);
  }, 30_000);

  it("advances stage by stage to Generate", async () => {
    for (const expected of ["Creativity", "Theme", "Composition", "Detailing", "Generate"]) {
      await clickAdvance();
      expect(app.session!.stage).toBe(expected);
      const active = root.querySelector(".stepper-stages .stage.active");
      expect(active?.getAttribute("data-stage")).toBe(expected);
    }
    expect(app.session!.iterations).toHaveLength(1);
    expect(root.querySelector("#editor .preview svg")).not.toBeNull();
    expect(root.querySelectorAll("#history .iteration")).toHaveLength(1);
  }, 60_000);

  it("selects an element by clicking its rectangle", async () => {
    const rect = root.querySelector<SVGElement>("#editor .preview rect.element");
    expect(rect).not.toBeNull();
    const path = rect!.getAttribute("data-path")!;
    rect!.dispatchEvent(new window.MouseEvent("click", { bubbles: true }));
    await app.settled();

    expect(app.state.selectedPath).toBe(path);
    const panelTitle = root.querySelector("#editor .panel h3");
    expect(panelTitle?.textContent).toBe(path);
    // The panel exposes all four editable dimensions.
    for (const name of ["content", "color", "bbox", "z-order"]) {
      expect(root.querySelector(`#editor .panel input[name=${name}]`)).not.toBeNull();
    }
  }, 30_000);

  it("applies a color edit and regenerates a differing iteration", async () => {
    const before = app.session!;
    const beforeHash = before.iterations[before.iterations.length - 1].scene_hash;
    const selected = app.state.selectedPath!;

    const colorInput = root.querySelector<HTMLInputElement>("#editor .panel input[name=color]")!;
    colorInput.value = "#00ff00";
    colorInput.dispatchEvent(new window.Event("change", { bubbles: true }));
    await app.settled();
    expect(app.state.buffer).toHaveLength(1);

    root.querySelector<HTMLButtonElement>("#editor button.apply")!.click();
    await app.settled();

    const after = app.session!;
    expect(after.iterations).toHaveLength(before.iterations.length + 1);
    const afterHash = after.iterations[after.iterations.length - 1].scene_hash;
    expect(afterHash).not.toBe(beforeHash);
    expect(app.state.buffer).toHaveLength(0);

    // The preview SVG is refetched from the service and shows the new color.
    const previewMarkup = root.querySelector("#editor .preview")!.innerHTML;
    expect(previewMarkup).toContain("#00FF00");
    const rect = root.querySelector(`#editor .preview rect.element[data-path="${selected}"]`);
    expect(rect?.getAttribute("fill")).toBe("#00FF00");

    // History view shows the latest iteration with its recorded edit.
    const cards = root.querySelectorAll("#history .iteration");
    expect(cards).toHaveLength(after.iterations.length);
    const lastCard = cards[cards.length - 1];
    expect(lastCard.querySelector(".edit-summary")?.textContent).toContain("color");
    expect(lastCard.querySelector(".prompt")?.textContent).toContain("An image about");
  }, 60_000);

  it("surfaces a no-change badge for a no-op iteration", async () => {
    // Queue an edit that rewrites content to its current value: same hash.
    const path = app.state.selectedPath!;
    const contentInput = root.querySelector<HTMLInputElement>("#editor .panel input[name=content]")!;
    contentInput.dispatchEvent(new window.Event("change", { bubbles: true }));
    await app.settled();
    root.querySelector<HTMLButtonElement>("#editor button.apply")!.click();
    await app.settled();

    const iterations = app.session!.iterations;
    expect(iterations[iterations.length - 1].scene_hash)
      .toBe(iterations[iterations.length - 2].scene_hash);
    expect(root.querySelector("#history .iteration:last-child .no-change")).not.toBeNull();
    expect(path).toBeTruthy();
  }, 60_000);
});
