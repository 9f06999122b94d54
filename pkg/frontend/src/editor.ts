/**
 * Scene editor: the service-rendered debug SVG on the left (elements are
 * clickable via their data-path attributes), a property panel for the
 * selected element on the right, and an "apply & regenerate" button that
 * flushes the edit buffer as one atomic batch.
 *
 * The SVG markup comes verbatim from the service; the UI adds only event
 * wiring, never geometry or styling of its own.
 */

import type { EditOp, Scene, SceneElement } from "./types.js";
import { findElement } from "./types.js";
import type { ViewState } from "./state.js";

export interface EditorCallbacks {
  onSelect: (path: string | null) => void;
  onBuffer: (edit: EditOp) => void;
  onApply: () => void;
}

export function renderEditor(
  container: HTMLElement,
  scene: Scene,
  svgMarkup: string,
  state: ViewState,
  callbacks: EditorCallbacks,
  errorMessage?: string,
): void {
  container.innerHTML = "";
  container.classList.add("editor");

  const preview = document.createElement("div");
  preview.className = "preview";
  preview.innerHTML = svgMarkup;
  preview.querySelectorAll<SVGElement>("rect.element").forEach((rect) => {
    rect.addEventListener("click", () => {
      callbacks.onSelect(rect.getAttribute("data-path"));
    });
    if (rect.getAttribute("data-path") === state.selectedPath) {
      rect.classList.add("selected");
    }
  });
  container.appendChild(preview);

  const panel = document.createElement("div");
  panel.className = "panel";
  const selected = state.selectedPath ? findElement(scene, state.selectedPath) : undefined;
  if (selected) {
    renderPanel(panel, selected, callbacks);
  } else {
    const hint = document.createElement("p");
    hint.className = "hint";
    hint.textContent = "Click an element in the preview to edit it.";
    panel.appendChild(hint);
  }

  if (state.buffer.length > 0) {
    const pending = document.createElement("ul");
    pending.className = "pending-edits";
    state.buffer.forEach((edit) => {
      const item = document.createElement("li");
      item.textContent = edit.field
        ? `${edit.op} ${edit.field} @ ${edit.path}`
        : `${edit.op} @ ${edit.path}`;
      pending.appendChild(item);
    });
    panel.appendChild(pending);
  }

  const apply = document.createElement("button");
  apply.className = "apply";
  apply.textContent = `Apply & regenerate (${state.buffer.length})`;
  apply.disabled = state.buffer.length === 0;
  apply.addEventListener("click", callbacks.onApply);
  panel.appendChild(apply);

  if (errorMessage) {
    const banner = document.createElement("div");
    banner.className = "error-banner";
    banner.textContent = errorMessage;
    panel.appendChild(banner);
  }

  container.appendChild(panel);
}

function renderPanel(
  panel: HTMLElement,
  element: SceneElement,
  callbacks: EditorCallbacks,
): void {
  const title = document.createElement("h3");
  title.textContent = element.path;
  panel.appendChild(title);

  const contentField = textInput("content", element.content);
  contentField.input.addEventListener("change", () => {
    callbacks.onBuffer({
      op: "set",
      path: element.path,
      field: "content",
      value: contentField.input.value,
    });
  });
  panel.appendChild(contentField.row);

  const colorField = textInput("color", element.color?.primary_hex ?? "");
  colorField.input.classList.add("color-input");
  colorField.input.addEventListener("change", () => {
    callbacks.onBuffer({
      op: "set",
      path: element.path,
      field: "color",
      value: {
        primary_hex: colorField.input.value.toUpperCase(),
        palette: element.color?.palette ?? [],
        contrast: element.color?.contrast ?? 0.5,
      },
    });
  });
  panel.appendChild(colorField.row);

  const bboxField = textInput("bbox", element.bbox.join(", "));
  bboxField.input.addEventListener("change", () => {
    const parts = bboxField.input.value.split(",").map((s) => Number(s.trim()));
    if (parts.length === 4 && parts.every((v) => Number.isFinite(v))) {
      callbacks.onBuffer({ op: "set", path: element.path, field: "bbox", value: parts });
    }
  });
  panel.appendChild(bboxField.row);

  const zField = textInput("z-order", String(element.z_order));
  zField.input.addEventListener("change", () => {
    const value = Number(zField.input.value);
    if (Number.isInteger(value)) {
      callbacks.onBuffer({ op: "set", path: element.path, field: "z_order", value });
    }
  });
  panel.appendChild(zField.row);

  const styleField = textInput(
    "style modifiers",
    element.style?.modifiers.join(", ") ?? "",
  );
  styleField.input.addEventListener("change", () => {
    const modifiers = styleField.input.value
      .split(",")
      .map((s) => s.trim())
      .filter(Boolean);
    callbacks.onBuffer({
      op: "set",
      path: element.path,
      field: "style",
      value: {
        style_name: element.style?.style_name ?? "flat-infographic",
        modifiers,
        abstraction_level: element.style?.abstraction_level ?? 5,
      },
    });
  });
  panel.appendChild(styleField.row);

  const remove = document.createElement("button");
  remove.className = "delete-element";
  remove.textContent = "Delete element";
  remove.addEventListener("click", () => {
    callbacks.onBuffer({ op: "delete", path: element.path });
  });
  panel.appendChild(remove);
}

function textInput(label: string, value: string): { row: HTMLElement; input: HTMLInputElement } {
  const row = document.createElement("label");
  row.className = "field";
  const caption = document.createElement("span");
  caption.textContent = label;
  const input = document.createElement("input");
  input.type = "text";
  input.value = value;
  input.name = label.replace(/\s+/g, "-");
  row.appendChild(caption);
  row.appendChild(input);
  return { row, input };
}
