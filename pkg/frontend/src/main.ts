import { App } from "./app.js";

const app = new App();
document.body.appendChild(app.element);
void app.start();
