/** Embedded fixture episode: scripted provider, local memory, first shop task. */

export const FIXTURE_CONFIG = 'provider = "scripted"\nmemory = "local"\n';

export const FIXTURE_TASK = "t01";
