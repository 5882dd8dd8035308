//! The GIR template text handed to stage-1 models so they emit the expected
//! JSON shape. Placeholder spans (`<...>`) mark the slots to fill; the `"..."`
//! entries mark repetition and are skipped by the parser if echoed back.

pub const GIR_TEMPLATE: &str = r#"{
  "modules": [
    {
      "<Top_module_name>": "<Brief description of the module's purpose, using two sentences to summarize>",
      "Function": "<Brief description of the module's purpose, using two sentences to summarize>",
      "Parameters": [
        {
          "<Parameter_name>": "<value>",
          "...": "..."
        }
      ],
      "Ports": [
        {
          "<Port_name>": {
            "Direction": "input|output|inout",
            "Type": "reg|wire",
            "Bits": "integer|bit_range"
          }
        },
        "...": "..."
      ],
      "Instances": [
        {
          "<Instance_name>": {
            "Type": "<module_type>",
            "Function": "<Brief description of the module's purpose, using two sentences to summarize>",
            "Parameters": [
              {
                "<parameter_name>": "<value>",
                "...": "..."
              }
            ],
            "Connections": [
              {
                "<submodule_port>": "<parent_signal_expression>",
                "...": "..."
              }
            ]
          }
        },
        "...": "..."
      ]
    }
  ]
}"#;
