/**
 * Wire types mirroring the service's JSON bodies.
 * The UI never computes scenes itself; these are read-only views.
 */

export interface Canvas {
  width_px: number;
  height_px: number;
  aspect_label?: string;
}

export interface StyleSpec {
  style_name: string;
  modifiers: string[];
  abstraction_level: number;
}

export interface ColorSpec {
  primary_hex: string;
  palette: string[];
  contrast: number;
}

export interface LightingSpec {
  light_direction: string;
  mood: string;
  shadow_strength: number;
  reflection: boolean;
}

export interface SceneElement {
  id: string;
  path: string;
  bbox: [number, number, number, number];
  content: string;
  z_order: number;
  region_id?: string;
  style?: StyleSpec;
  color?: ColorSpec;
  children: SceneElement[];
}

export interface ThemeConcept {
  label: string;
  keywords: string[];
  weight: number;
}

export interface Scene {
  canvas: Canvas;
  theme: string;
  theme_concepts: ThemeConcept[];
  template_id: string;
  style: StyleSpec;
  lighting: LightingSpec;
  elements: SceneElement[];
  iteration_index: number;
  seed: number;
}

export interface IterationRecord {
  index: number;
  scene_snapshot: Scene;
  compiled_prompt: string;
  scene_hash: string;
  timestamp: string;
  image_ref?: string;
  user_edits: string[];
}

export type Stage =
  | "Input"
  | "Creativity"
  | "Theme"
  | "Composition"
  | "Detailing"
  | "Generate";

export const STAGES: Stage[] = [
  "Input",
  "Creativity",
  "Theme",
  "Composition",
  "Detailing",
  "Generate",
];

export interface Session {
  id: string;
  input_text: string;
  stage: Stage;
  created_at: string;
  updated_at: string;
  style?: StyleSpec;
  theme: string;
  theme_concepts: ThemeConcept[];
  template_id: string;
  current_scene?: Scene;
  iterations: IterationRecord[];
}

export interface Region {
  id: string;
  bbox: [number, number, number, number];
  role: "focal" | "support" | "background";
  salience: number;
}

export interface Template {
  id: string;
  name: string;
  description: string;
  regions: Region[];
}

export type EditField = "content" | "bbox" | "style" | "color" | "z_order";

export interface EditOp {
  op: "set" | "delete" | "add";
  path: string;
  field?: EditField;
  value?: unknown;
}

export interface AdvanceParams {
  style_name?: string;
  template_id?: string;
  seed?: number;
  [key: string]: unknown;
}

/** Walk every element of a scene in document order. */
export function walkElements(scene: Scene): SceneElement[] {
  const out: SceneElement[] = [];
  const visit = (el: SceneElement) => {
    out.push(el);
    el.children.forEach(visit);
  };
  scene.elements.forEach(visit);
  return out;
}

export function findElement(scene: Scene, path: string): SceneElement | undefined {
  return walkElements(scene).find((el) => el.path === path);
}
