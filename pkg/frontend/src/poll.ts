/** Submit-and-poll: the write path of the edit loop.
 *
 * The service executes instructions synchronously, but the contract only
 * promises that the step eventually appears in the session record, so the
 * submit helper always confirms by polling (1 s interval by default).
 */

import { ApiClient, ServiceError, StepRecord } from "./api.js";
import { bindingsAt, StepView, toStepView } from "./model.js";

const sleep = (ms: number) => new Promise((r) => setTimeout(r, ms));

export interface PollOptions {
  intervalMs?: number;
  timeoutMs?: number;
}

/** Wait until the session has at least `count` steps; returns the last one. */
export async function pollForStep(
  api: ApiClient,
  sessionId: string,
  count: number,
  options: PollOptions = {},
): Promise<StepRecord> {
  const interval = options.intervalMs ?? 1000;
  const deadline = Date.now() + (options.timeoutMs ?? 60_000);
  for (;;) {
    const session = await api.getSession(sessionId);
    if (session.steps.length >= count) return session.steps[count - 1]!;
    if (Date.now() > deadline) {
      throw new ServiceError(0, `step ${count} did not appear in time`);
    }
    await sleep(interval);
  }
}

export async function submitInstruction(
  api: ApiClient,
  sessionId: string,
  text: string,
  options: PollOptions = {},
): Promise<StepView> {
  const before = await api.getSession(sessionId);
  const expected = before.steps.length + 1;
  await api.submitInstruction(sessionId, text);
  await pollForStep(api, sessionId, expected, options);
  const after = await api.getSession(sessionId);
  return toStepView(after.steps[expected - 1]!, bindingsAt(before, before.steps.length));
}
