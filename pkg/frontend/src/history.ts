/**
 * Iteration browser: one card per iteration with its SVG thumbnail,
 * scene-hash badge (marking unchanged consecutive hashes), prompt text,
 * and the user edits that produced it.
 */

import type { Session } from "./types.js";

export interface HistoryData {
  svgByIteration: Map<number, string>;
  promptByIteration: Map<number, string>;
}

export function renderHistory(
  container: HTMLElement,
  session: Session,
  data: HistoryData,
): void {
  container.innerHTML = "";
  container.classList.add("history");

  session.iterations.forEach((record) => {
    const card = document.createElement("article");
    card.className = "iteration";
    card.dataset.index = String(record.index);

    const header = document.createElement("header");
    const title = document.createElement("strong");
    title.textContent = `Iteration ${record.index}`;
    header.appendChild(title);

    const hash = document.createElement("code");
    hash.className = "hash-badge";
    hash.textContent = record.scene_hash.slice(0, 12);
    header.appendChild(hash);

    const previous = record.index > 0 ? session.iterations[record.index - 1] : undefined;
    if (previous && previous.scene_hash === record.scene_hash) {
      const badge = document.createElement("span");
      badge.className = "no-change";
      badge.textContent = "no change";
      header.appendChild(badge);
    }
    card.appendChild(header);

    const svg = data.svgByIteration.get(record.index);
    if (svg) {
      const thumb = document.createElement("div");
      thumb.className = "thumb";
      thumb.innerHTML = svg;
      card.appendChild(thumb);
    }

    if (record.user_edits.length > 0) {
      const edits = document.createElement("ul");
      edits.className = "edit-summary";
      record.user_edits.forEach((text) => {
        const item = document.createElement("li");
        item.textContent = text;
        edits.appendChild(item);
      });
      card.appendChild(edits);
    }

    const prompt = data.promptByIteration.get(record.index);
    if (prompt) {
      const pre = document.createElement("pre");
      pre.className = "prompt";
      pre.textContent = prompt;
      card.appendChild(pre);
    }

    container.appendChild(card);
  });
}
