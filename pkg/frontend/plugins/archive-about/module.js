// Sample settings plugin: shows live plugin counts pulled from the
// management endpoint.
export function render(mount) {
  const pane = document.createElement("div");
  pane.className = "about-pane";
  pane.textContent = "loading archive facts...";
  mount.replaceChildren(pane);
  fetch("/management/plugins")
    .then((rsp) => rsp.json())
    .then((body) => {
      const counts = {};
      for (const plugin of body.plugins) {
        counts[plugin.kind] = (counts[plugin.kind] || 0) + 1;
      }
      pane.textContent = Object.entries(counts)
        .map(([kind, n]) => `${kind}: ${n}`)
        .join(" | ") || "no plugins";
    })
    .catch(() => { pane.textContent = "facts unavailable"; });
}
