# Domain models: process specs, run configurations, run manifest
