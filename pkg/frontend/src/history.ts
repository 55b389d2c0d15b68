/** Session history: step navigation and forking.
 *
 * Navigating to an earlier step is read-only — the view shows the
 * environment as of that step, and later steps are greyed out, not
 * discarded.  Editing from an earlier point goes through `forkFrom`, which
 * asks the service for a fresh session that inherits steps 1..n and then
 * diverges independently of the original.
 */

import type { ApiClient, SessionRecord } from "./api.js";
import { bindingsAt, sessionViews, StepView } from "./model.js";

export interface HistoryEntry extends StepView {
  /** True when the entry is after the navigation cursor (shown greyed). */
  greyed: boolean;
  current: boolean;
}

export interface HistoryView {
  sessionId: string;
  /** 0 = empty session, n = viewing the state after step n. */
  cursor: number;
  /** Viewing anything but the latest step is read-only. */
  readOnly: boolean;
  entries: HistoryEntry[];
  /** Environment manifest (name -> digest) at the cursor. */
  bindings: Map<string, string>;
}

export function navigateTo(session: SessionRecord, step: number): HistoryView {
  if (!Number.isInteger(step) || step < 0 || step > session.steps.length) {
    throw new RangeError(`step ${step} out of range 0..${session.steps.length}`);
  }
  const entries = sessionViews(session).map((view) => ({
    ...view,
    greyed: view.index > step,
    current: view.index === step,
  }));
  return {
    sessionId: session.id,
    cursor: step,
    readOnly: step < session.steps.length,
    entries,
    bindings: bindingsAt(session, step),
  };
}

export function latest(session: SessionRecord): HistoryView {
  return navigateTo(session, session.steps.length);
}

/** Fork at the cursor; returns the new session positioned at its tip. */
export async function forkFrom(
  api: ApiClient,
  session: SessionRecord,
  step: number,
): Promise<HistoryView> {
  if (step < 1 || step > session.steps.length) {
    throw new RangeError(`cannot fork at step ${step}`);
  }
  const forked = await api.forkSession(session.id, step);
  return latest(forked);
}
