/**
 * Client-side view state: which stage and element are selected, plus the
 * dirty edit buffer that "apply & regenerate" flushes as one atomic batch.
 */

import type { EditOp, Scene, Session } from "./types.js";
import { findElement, STAGES } from "./types.js";

export type PreviewMode = "svg" | "image";

export interface ViewState {
  sessionId: string | null;
  selectedStage: number;
  selectedPath: string | null;
  buffer: EditOp[];
  previewMode: PreviewMode;
}

export function initialViewState(): ViewState {
  return {
    sessionId: null,
    selectedStage: 0,
    selectedPath: null,
    buffer: [],
    previewMode: "svg",
  };
}

export function stageIndex(session: Session): number {
  return STAGES.indexOf(session.stage);
}

/**
 * Queue an edit, keeping the invariant that pending edits reference paths
 * present in the displayed scene ("add" targets must have a present parent
 * instead). A later edit to the same (op, path, field) replaces the earlier.
 */
export function bufferEdit(state: ViewState, scene: Scene, edit: EditOp): ViewState {
  if (edit.op === "add") {
    const parent = edit.path.includes("/")
      ? edit.path.slice(0, edit.path.lastIndexOf("/"))
      : null;
    if (parent !== null && !findElement(scene, parent)) {
      throw new Error(`parent of ${edit.path} is not in the displayed scene`);
    }
  } else if (!findElement(scene, edit.path)) {
    throw new Error(`${edit.path} is not in the displayed scene`);
  }
  const buffer = state.buffer.filter(
    (e) => !(e.op === edit.op && e.path === edit.path && e.field === edit.field),
  );
  buffer.push(edit);
  return { ...state, buffer };
}

/** Drop pending edits whose paths vanished from the scene (e.g. after a
 * server-side delete), preserving the buffer invariant. */
export function pruneBuffer(state: ViewState, scene: Scene | undefined): ViewState {
  if (!scene) {
    return { ...state, buffer: [] };
  }
  const buffer = state.buffer.filter((e) => {
    if (e.op === "add") {
      const parent = e.path.includes("/")
        ? e.path.slice(0, e.path.lastIndexOf("/"))
        : null;
      return parent === null || Boolean(findElement(scene, parent));
    }
    return Boolean(findElement(scene, e.path));
  });
  return { ...state, buffer };
}

export function clearBuffer(state: ViewState): ViewState {
  return { ...state, buffer: [] };
}

export function selectPath(state: ViewState, path: string | null): ViewState {
  return { ...state, selectedPath: path };
}
