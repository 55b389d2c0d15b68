/** View-model types: the read-only StepView the gallery renders. */

import type { BindingRecord, SessionRecord, StepRecord } from "./api.js";

export const PANORAMA_TYPES = [
  "layout_map",
  "depth_map",
  "semantic_map",
  "texture",
] as const;

export interface PanoramaPanel {
  name: string;
  type: string;
  /** Artifact URL (PNG for maps/texture, npy for depth). */
  url: string;
  digest: string;
  /** True when this binding is new or rebound relative to the previous step. */
  changed: boolean;
}

export interface StepView {
  index: number;
  instruction: string;
  programLines: string[];
  status: "ok" | "failed";
  error: string | null;
  /** 1-based program line carrying the failure, when identifiable. */
  errorLine: number | null;
  panels: PanoramaPanel[];
  /** Mesh binding (JSON manifest referencing obj/mtl/texture artifacts). */
  mesh: BindingRecord | null;
  /** Names whose digest differs from the environment before this step. */
  changedNames: string[];
}

/** Environment manifest (name -> digest) as of the end of step `n`. */
export function bindingsAt(
  session: SessionRecord,
  n: number,
): Map<string, string> {
  const out = new Map<string, string>();
  for (const step of session.steps.slice(0, n)) {
    if (step.status !== "ok") continue;
    for (const b of step.bindings) out.set(b.name, b.digest);
  }
  return out;
}

function errorLineOf(step: StepRecord): number | null {
  if (step.status !== "failed" || !step.error) return null;
  const m = /line (\d+)/.exec(step.error);
  return m ? Number(m[1]) : null;
}

/**
 * Project one service step record into the gallery view.  `before` is the
 * environment manifest preceding the step; panels for unchanged variables
 * keep their artifact but lose the diff badge.
 */
export function toStepView(
  step: StepRecord,
  before: Map<string, string>,
): StepView {
  const changedNames = step.bindings
    .filter((b) => before.get(b.name) !== b.digest)
    .map((b) => b.name)
    .sort();
  const changed = new Set(changedNames);
  const panels = step.bindings
    .filter((b) => (PANORAMA_TYPES as readonly string[]).includes(b.type))
    .map((b) => ({
      name: b.name,
      type: b.type,
      url: b.url,
      digest: b.digest,
      changed: changed.has(b.name),
    }))
    .sort((a, b) => a.name.localeCompare(b.name));
  const meshes = step.bindings.filter((b) => b.type === "mesh");
  return {
    index: step.index,
    instruction: step.instruction,
    programLines: step.program.split("\n").filter((l) => l.trim().length > 0),
    status: step.status,
    error: step.error,
    errorLine: errorLineOf(step),
    panels,
    mesh: meshes.length > 0 ? meshes[meshes.length - 1]! : null,
    changedNames,
  };
}

/** StepViews for a whole session, threading the environment fold through. */
export function sessionViews(session: SessionRecord): StepView[] {
  const views: StepView[] = [];
  for (let i = 0; i < session.steps.length; i++) {
    views.push(toStepView(session.steps[i]!, bindingsAt(session, i)));
  }
  return views;
}
