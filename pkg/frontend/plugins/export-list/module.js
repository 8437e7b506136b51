// Sample result-batch plugin: attaches a button that pops a pane below
// the search result view listing the visible results as CSV-ish text.
export function render(mount, context) {
  const hits = Array.isArray(context.payload) ? context.payload : [];
  const button = document.createElement("button");
  button.textContent = `Export ${hits.length} result(s)`;
  const pane = document.createElement("pre");
  pane.hidden = true;
  pane.className = "export-pane";
  button.addEventListener("click", () => {
    pane.textContent = hits
      .map((h) => [h.uri, (h.fields.Modality || []).join(";"),
                   (h.fields.PatientName || []).join(";")].join(","))
      .join("\n");
    pane.hidden = !pane.hidden;
  });
  mount.replaceChildren(button, pane);
}
