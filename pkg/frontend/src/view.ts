// DOM rendering. Pure function of ConsoleState into a fixed skeleton:
// connection banner, chat transcript, composer with an always-visible
// interrupt button, four labeled pose bars plus a schematic side view,
// the equalizer weights, and eight feedback sliders.

import type { ConsoleCore, ConsoleState, TranscriptEntry } from "./core.js";
import { MECHANISM_ORDER } from "./core.js";
import { METRICS } from "./types.js";
import type { MetricName } from "./types.js";

export class ConsoleView {
  private transcriptEl!: HTMLElement;
  private bannerEl!: HTMLElement;
  private poseEl!: HTMLElement;
  private schematicEl!: HTMLElement;
  private weightsEl!: HTMLElement;
  private inputEl!: HTMLInputElement;
  private sliders = new Map<MetricName, HTMLInputElement>();

  constructor(
    private readonly root: HTMLElement,
    private readonly core: ConsoleCore,
    doc?: Document,
  ) {
    this.doc = doc ?? root.ownerDocument;
  }

  private readonly doc: Document;

  mount(): void {
    this.root.innerHTML = "";
    this.bannerEl = this.section("banner");
    const columns = this.el("div", "columns");
    this.root.appendChild(columns);

    const chatPane = this.el("div", "pane chat-pane");
    columns.appendChild(chatPane);
    this.transcriptEl = this.el("div", "transcript");
    chatPane.appendChild(this.transcriptEl);
    chatPane.appendChild(this.buildComposer());

    const bedPane = this.el("div", "pane bed-pane");
    columns.appendChild(bedPane);
    this.poseEl = this.el("div", "pose");
    bedPane.appendChild(this.heading("Bed pose"));
    bedPane.appendChild(this.poseEl);
    this.schematicEl = this.el("div", "schematic");
    bedPane.appendChild(this.schematicEl);
    bedPane.appendChild(this.heading("Service emphasis"));
    this.weightsEl = this.el("div", "weights");
    bedPane.appendChild(this.weightsEl);
    bedPane.appendChild(this.heading("Rate the last reply"));
    bedPane.appendChild(this.buildFeedbackForm());

    this.core.subscribe((state) => this.render(state));
    this.render(this.core.state);
  }

  // --- skeleton builders ---------------------------------------------------------

  private el<K extends keyof HTMLElementTagNameMap>(tag: K, className?: string): HTMLElementTagNameMap[K] {
    const node = this.doc.createElement(tag);
    if (className) node.className = className;
    return node;
  }

  private heading(text: string): HTMLElement {
    const h = this.el("h2");
    h.textContent = text;
    return h;
  }

  private section(className: string): HTMLElement {
    const node = this.el("div", className);
    this.root.appendChild(node);
    return node;
  }

  private buildComposer(): HTMLElement {
    const composer = this.el("div", "composer");
    this.inputEl = this.el("input");
    this.inputEl.type = "text";
    this.inputEl.placeholder = "Tell the bed what you need…";
    this.inputEl.id = "request-input";
    composer.appendChild(this.inputEl);

    const send = this.el("button", "send");
    send.id = "send-button";
    send.textContent = "Send";
    send.addEventListener("click", () => this.submitRequest());
    this.inputEl.addEventListener("keydown", (ev: KeyboardEvent) => {
      if (ev.key === "Enter") this.submitRequest();
    });
    composer.appendChild(send);

    // the interrupt control is always visible and never disabled
    const interrupt = this.el("button", "interrupt");
    interrupt.id = "interrupt-button";
    interrupt.textContent = "STOP";
    interrupt.addEventListener("click", () => void this.core.interrupt());
    composer.appendChild(interrupt);
    return composer;
  }

  private buildFeedbackForm(): HTMLElement {
    const form = this.el("div", "feedback");
    for (const metric of METRICS) {
      const row = this.el("label", "slider-row");
      const name = this.el("span", "metric-name");
      name.textContent = metric;
      row.appendChild(name);
      const slider = this.el("input");
      slider.type = "range";
      slider.min = "1";
      slider.max = "5";
      slider.step = "1";
      slider.value = "3";
      slider.id = `slider-${metric}`;
      row.appendChild(slider);
      this.sliders.set(metric, slider);
      form.appendChild(row);
    }
    const submit = this.el("button", "send-feedback");
    submit.id = "feedback-button";
    submit.textContent = "Send feedback";
    submit.addEventListener("click", () => void this.submitFeedback());
    form.appendChild(submit);
    return form;
  }

  private submitRequest(): void {
    const text = this.inputEl.value.trim();
    if (!text) return;
    this.inputEl.value = "";
    void this.core.sendRequest(text);
  }

  private async submitFeedback(): Promise<void> {
    const scores = {} as Record<MetricName, number>;
    for (const [metric, slider] of this.sliders) scores[metric] = Number(slider.value);
    await this.core.sendFeedback(scores);
  }

  // --- rendering --------------------------------------------------------------------

  render(state: ConsoleState): void {
    this.renderBanner(state);
    this.renderTranscript(state);
    this.renderPose(state);
    this.renderWeights(state);
  }

  private renderBanner(state: ConsoleState): void {
    const labels: Record<string, string> = {
      connecting: "Connecting…",
      open: state.sessionId ? `Connected — session ${state.sessionId}` : "Connected",
      reconnecting: "Connection lost — reconnecting…",
      closed: "Disconnected",
    };
    this.bannerEl.textContent = labels[state.connection] ?? state.connection;
    this.bannerEl.className = `banner banner-${state.connection}`;
  }

  private renderTranscript(state: ConsoleState): void {
    this.transcriptEl.innerHTML = "";
    for (const entry of state.transcript) {
      this.transcriptEl.appendChild(this.bubble(entry));
    }
    this.transcriptEl.scrollTop = this.transcriptEl.scrollHeight;
  }

  private bubble(entry: TranscriptEntry): HTMLElement {
    const node = this.el("div", `bubble bubble-${entry.role} bubble-${entry.kind} state-${entry.state}`);
    node.textContent = entry.text;
    if (entry.state === "pending") {
      const mark = this.el("span", "state-mark");
      mark.textContent = " …";
      node.appendChild(mark);
    } else if (entry.state === "error") {
      const mark = this.el("span", "state-mark error");
      mark.textContent = ` ⚠ ${entry.error ?? "failed"}`;
      node.appendChild(mark);
    }
    return node;
  }

  private renderPose(state: ConsoleState): void {
    this.poseEl.innerHTML = "";
    for (const mech of MECHANISM_ORDER) {
      const pose = state.pose[mech];
      const row = this.el("div", "pose-row");
      const label = this.el("span", "pose-label");
      label.textContent = mech.replace("_", " ");
      row.appendChild(label);
      const track = this.el("div", "bar-track");
      const fill = this.el("div", pose.moving ? "bar-fill moving" : "bar-fill");
      fill.id = `bar-${mech}`;
      fill.style.width = `${Math.round(pose.pos * 100)}%`;
      track.appendChild(fill);
      row.appendChild(track);
      const value = this.el("span", "pose-value");
      value.textContent = `${Math.round(pose.pos * 100)}%${pose.moving ? " ▸" : ""}`;
      row.appendChild(value);
      this.poseEl.appendChild(row);
    }
    const step = this.el("div", "active-step");
    step.id = "active-step";
    step.textContent = state.active
      ? `running: ${state.active.action} (step ${state.active.index + 1}/${state.active.count}` +
        (state.active.repetitions > 1
          ? `, round ${state.active.iteration + 1}/${state.active.repetitions})`
          : ")")
      : "idle";
    this.poseEl.appendChild(step);
    this.schematicEl.innerHTML = schematicSvg(state);
  }

  private renderWeights(state: ConsoleState): void {
    this.weightsEl.innerHTML = "";
    if (!state.weights) {
      this.weightsEl.textContent = "—";
      return;
    }
    for (const metric of METRICS) {
      const weight = state.weights[metric] ?? 0;
      const row = this.el("div", "weight-row");
      const label = this.el("span", "metric-name");
      label.textContent = metric;
      row.appendChild(label);
      const track = this.el("div", "bar-track");
      const fill = this.el("div", "bar-fill weight");
      fill.id = `weight-${metric}`;
      fill.style.width = `${Math.min(100, Math.round(weight * 400))}%`; // 0.25 spans the track
      track.appendChild(fill);
      row.appendChild(track);
      const value = this.el("span", "pose-value");
      value.textContent = weight.toFixed(3);
      row.appendChild(value);
      this.weightsEl.appendChild(row);
    }
    const count = this.el("div", "update-count");
    count.id = "update-count";
    count.textContent = `${state.updateCount} feedback update${state.updateCount === 1 ? "" : "s"}`;
    this.weightsEl.appendChild(count);
  }
}

// Side-view schematic: lift raises the frame, backrest and leg rests pivot.
function schematicSvg(state: ConsoleState): string {
  const lift = state.pose.lift.pos;
  const back = state.pose.backrest.pos;
  const leftLeg = state.pose.left_leg.pos;
  const rightLeg = state.pose.right_leg.pos;
  const baseY = 86 - lift * 26;
  const backAngle = -(back * 65);
  const legAngleL = leftLeg * 38;
  const legAngleR = rightLeg * 38;
  return `
<svg viewBox="0 0 220 100" width="220" height="100" role="img" aria-label="bed side view">
  <rect x="18" y="${baseY + 6}" width="184" height="5" rx="2" fill="#8b9bb4"/>
  <line x1="40" y1="${baseY + 11}" x2="40" y2="94" stroke="#8b9bb4" stroke-width="4"/>
  <line x1="180" y1="${baseY + 11}" x2="180" y2="94" stroke="#8b9bb4" stroke-width="4"/>
  <g transform="translate(96 ${baseY}) rotate(${backAngle})">
    <rect x="-56" y="-4" width="56" height="6" rx="2" fill="#4a7dcf"/>
  </g>
  <rect x="96" y="${baseY - 4}" width="34" height="6" rx="2" fill="#4a7dcf"/>
  <g transform="translate(130 ${baseY}) rotate(${legAngleL})">
    <rect x="0" y="-4" width="36" height="5" rx="2" fill="#4a9d8f"/>
  </g>
  <g transform="translate(130 ${baseY + 1}) rotate(${legAngleR})">
    <rect x="0" y="-1" width="36" height="5" rx="2" fill="#72c2b6"/>
  </g>
</svg>`;
}
