export * from "./protocol";
export * from "./kinematics";
export * from "./panel";
export * from "./input";
export * from "./buttons";
export * from "./client";
export * from "./scene";
