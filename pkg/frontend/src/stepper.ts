/**
 * Stage stepper: six pills with completion states and one advance button.
 * Service errors (409/422/502) surface as an inline banner, never a crash.
 */

import type { Session } from "./types.js";
import { STAGES } from "./types.js";
import { stageIndex } from "./state.js";

export interface StepperCallbacks {
  onAdvance: () => void;
}

export function renderStepper(
  container: HTMLElement,
  session: Session,
  callbacks: StepperCallbacks,
  errorMessage?: string,
): void {
  const current = stageIndex(session);
  container.innerHTML = "";
  container.classList.add("stepper");

  const list = document.createElement("ol");
  list.className = "stepper-stages";
  STAGES.forEach((stage, i) => {
    const item = document.createElement("li");
    item.textContent = stage;
    item.dataset.stage = stage;
    item.className =
      i < current ? "stage done" : i === current ? "stage active" : "stage pending";
    list.appendChild(item);
  });
  container.appendChild(list);

  const button = document.createElement("button");
  button.className = "advance";
  button.textContent = current < STAGES.length - 1 ? `Run ${STAGES[current + 1]}` : "Regenerate";
  button.addEventListener("click", callbacks.onAdvance);
  container.appendChild(button);

  if (errorMessage) {
    const banner = document.createElement("div");
    banner.className = "error-banner";
    banner.textContent = errorMessage;
    container.appendChild(banner);
  }
}
